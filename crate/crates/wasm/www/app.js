import init, { networkLayout, minimumHistogram, mergesortProfile } from "./pkg/fragile_wasm.js";

const SVG = "http://www.w3.org/2000/svg";

function el(name, attrs, parent) {
  const node = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  parent.appendChild(node);
  return node;
}

function panel(id) {
  const root = document.getElementById(id);
  const field = (name) => root.querySelector(`[name=${name}]`);
  return {
    root,
    field,
    num: (name) => Number(field(name).value),
    str: (name) => field(name).value,
    out: root.querySelector(".out"),
    svg: root.querySelector("svg"),
  };
}

// Runs `work` and reports a thrown error in the panel instead of the console.
function guarded(p, work) {
  return () => {
    p.out.classList.remove("err");
    try {
      work();
    } catch (e) {
      p.out.textContent = String(e.message ?? e);
      p.out.classList.add("err");
      p.svg.replaceChildren();
    }
  };
}

function bars(svg, values, { width = 920, height = 220, color = "#4a7" } = {}) {
  svg.replaceChildren();
  svg.setAttribute("width", width);
  svg.setAttribute("height", height + 20);
  const top = Math.max(1, ...values);
  const w = width / values.length;
  values.forEach((v, i) => {
    const h = (v / top) * height;
    el("rect", { x: i * w, y: height - h, width: Math.max(w - 1, 0.5), height: h, fill: color }, svg);
  });
  el("text", { x: 2, y: height + 15, "font-size": 11 }, svg).textContent = `max ${top}`;
}

const net = panel("network");
let layout = null;

function drawNetwork() {
  const { width, layers, states } = layout;
  const step = net.num("step");
  const gap = 22;
  const col = 26;
  const svg = net.svg;
  svg.replaceChildren();
  svg.setAttribute("width", 60 + col * (layers.length + 1) * 2);
  svg.setAttribute("height", gap * (width + 1));
  for (let w = 0; w < width; w++) {
    const y = gap * (w + 1);
    el("line", { x1: 30, y1: y, x2: 30 + col * (layers.length + 1) * 2, y2: y, stroke: "#999" }, svg);
    el("text", { x: 2, y: y + 4, "font-size": 11 }, svg).textContent = states[step][w];
  }
  layers.forEach((layer, li) => {
    // Comparators in a layer that overlap vertically are spread over columns.
    const used = [];
    layer.forEach(([lo, hi]) => {
      let c = 0;
      while ((used[c] ?? []).some(([a, b]) => !(hi < a || lo > b))) c++;
      (used[c] ??= []).push([lo, hi]);
      const x = 40 + col * 2 * li + c * 6;
      const stroke = li < step ? "#bbb" : "#c33";
      el("line", { x1: x, y1: gap * (lo + 1), x2: x, y2: gap * (hi + 1), stroke, "stroke-width": 2 }, svg);
      for (const wire of [lo, hi]) el("circle", { cx: x, cy: gap * (wire + 1), r: 3, fill: stroke }, svg);
    });
  });
}

const buildNetwork = guarded(net, () => {
  layout = JSON.parse(networkLayout(net.str("kind"), net.num("n"), net.num("rounds"), BigInt(net.num("seed"))));
  const stepper = net.field("step");
  stepper.max = layout.layers.length;
  stepper.value = Math.min(Number(stepper.value), layout.layers.length);
  const eps = layout.epsilon == null ? "" : `  epsilon ${layout.epsilon}`;
  net.out.textContent = `width ${layout.width}  depth ${layout.depth}  size ${layout.size}${eps}`;
  drawNetwork();
});

const min = panel("minimum");
const runMinimum = guarded(min, () => {
  const h = JSON.parse(
    minimumHistogram(min.str("alg"), min.num("n"), min.num("trials"), BigInt(min.num("seed")), min.num("delta")),
  );
  min.out.textContent =
    `${h.algorithm}, n = ${h.n}, ${h.trials} trials\n` +
    `minimum: mean ${h.mean.toFixed(3)}, max ${h.max}; busiest other element: mean ${h.mean_rest.toFixed(2)}\n` +
    `x axis: comparisons of the minimum, 0..${h.counts.length - 1}`;
  bars(min.svg, h.counts);
});

const ms = panel("mergesort");
const runMergesort = guarded(ms, () => {
  const p = JSON.parse(mergesortProfile(ms.str("variant"), ms.num("n"), ms.str("input"), BigInt(ms.num("seed"))));
  const argmax = p.counts.indexOf(p.f_max);
  ms.out.textContent =
    `n = ${p.n}, work ${p.work}, busiest element at position ${argmax} (value ${p.values[argmax]}) ` +
    `with ${p.f_max} comparisons`;
  bars(ms.svg, p.counts, { color: "#47a" });
});

await init();
net.root.querySelector("button").addEventListener("click", buildNetwork);
net.field("step").addEventListener("input", () => layout && drawNetwork());
min.root.querySelector("button").addEventListener("click", runMinimum);
ms.root.querySelector("button").addEventListener("click", runMergesort);
buildNetwork();
runMinimum();
runMergesort();
