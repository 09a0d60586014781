import init, { heraldedWigner, fidelityCurve, clickCurve } from "./pkg/catsim_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guarded(noteId, fn) {
  return () => {
    $(noteId).textContent = "";
    try {
      fn();
    } catch (err) {
      $(noteId).textContent = String(err.message ?? err);
    }
  };
}

// Diverging map: blue for negative, red for positive, white at zero.
function colour(v, scale) {
  const t = Math.max(-1, Math.min(1, v / scale));
  const fade = Math.round(255 * (1 - Math.abs(t)));
  return t >= 0 ? [255, fade, fade] : [fade, fade, 255];
}

function drawWigner() {
  const n = num("w-points");
  const data = heraldedWigner(num("w-beta"), num("w-eta"), num("w-half"), n);
  const reliable = data[n * n] === 1;
  const canvas = $("w-canvas");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  const scale = 2 / Math.PI;
  for (let row = 0; row < n; row++) {
    for (let col = 0; col < n; col++) {
      // Row 0 is the lowest momentum; flip so p grows upward.
      const [r, g, b] = colour(data[row * n + col], scale);
      const at = 4 * ((n - 1 - row) * n + col);
      img.data.set([r, g, b, 255], at);
    }
  }
  const buffer = new OffscreenCanvas(n, n);
  buffer.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(buffer, 0, 0, canvas.width, canvas.height);
  if (!reliable) {
    $("w-note").textContent = "Grid extends past the reliable region of the truncated space.";
  }
}

function plot(canvas, xs, series, yRange) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 36;
  const [x0, x1] = [xs[0], xs[xs.length - 1]];
  const [y0, y1] = yRange;
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (width - 2 * pad);
  const py = (y) => height - pad - ((y - y0) / (y1 - y0)) * (height - 2 * pad);
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toFixed(2), pad, height - pad + 14);
  ctx.fillText(x1.toFixed(2), width - pad - 24, height - pad + 14);
  ctx.fillText(y0.toFixed(2), 2, height - pad);
  ctx.fillText(y1.toFixed(2), 2, pad + 4);
  for (const { ys, stroke, label } of series) {
    ctx.strokeStyle = stroke;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
    ctx.fillStyle = stroke;
    ctx.fillText(label, px(xs[xs.length - 1]) - 60, py(ys[ys.length - 1]) - 6);
  }
}

function linspace(lo, hi, steps) {
  return Array.from({ length: steps }, (_, i) => lo + ((hi - lo) * i) / (steps - 1));
}

function drawFidelity() {
  const steps = 41;
  const etaMin = num("f-eta");
  const ys = Array.from(fidelityCurve(num("f-beta"), etaMin, steps));
  plot($("f-canvas"), linspace(etaMin, 1, steps), [{ ys, stroke: "#c33", label: "fidelity" }], [0, 1]);
}

function drawClick() {
  const steps = 40;
  const alphaMax = num("c-alpha");
  const data = clickCurve(num("c-m"), 0.05, alphaMax, steps);
  const fid = [];
  const prob = [];
  for (let i = 0; i < steps; i++) {
    fid.push(data[2 * i]);
    prob.push(data[2 * i + 1]);
  }
  plot($("c-canvas"), linspace(0.05, alphaMax, steps), [
    { ys: fid, stroke: "#c33", label: "fidelity" },
    { ys: prob, stroke: "#36c", label: "probability" },
  ], [0, 1]);
}

await init();
$("w-run").addEventListener("click", guarded("w-note", drawWigner));
$("f-run").addEventListener("click", guarded("f-note", drawFidelity));
$("c-run").addEventListener("click", guarded("c-note", drawClick));
guarded("w-note", drawWigner)();
guarded("f-note", drawFidelity)();
guarded("c-note", drawClick)();
