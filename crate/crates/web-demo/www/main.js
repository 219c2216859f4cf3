import init, { field, noise_vs_smooth, theta_sweep } from "./pkg/structure_web_demo.js";

const $ = (id) => document.getElementById(id);

function colour(t) {
  // Blue-white-red for values scaled to [-1, 1].
  const a = Math.min(1, Math.abs(t));
  const c = Math.round(255 * (1 - a));
  return t >= 0 ? `rgb(255,${c},${c})` : `rgb(${c},${c},255)`;
}

function drawField(v) {
  const cv = $("field"), ctx = cv.getContext("2d");
  const n = v.n, px = cv.width / n;
  const mean = v.values.reduce((a, b) => a + b, 0) / v.values.length;
  const span = Math.max(...v.values.map((x) => Math.abs(x - mean))) || 1;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      ctx.fillStyle = colour((v.values[i * n + j] - mean) / span);
      ctx.fillRect(i * px, (n - 1 - j) * px, px, px);
    }
  }
  const mag = v.flux_x.map((x, k) => Math.hypot(x, v.flux_y[k]));
  const big = Math.max(...mag) || 1;
  const stride = Math.max(1, Math.floor(n / 16));
  ctx.strokeStyle = "#111";
  for (let i = 0; i < n; i += stride) {
    for (let j = 0; j < n; j += stride) {
      const k = i * n + j, s = (0.9 * stride * px) / big;
      const x0 = (i + 0.5) * px, y0 = (n - j - 0.5) * px;
      ctx.beginPath();
      ctx.moveTo(x0, y0);
      ctx.lineTo(x0 + s * v.flux_x[k], y0 - s * v.flux_y[k]);
      ctx.stroke();
    }
  }
  $("out1").textContent = `struc = ${v.struc.toPrecision(5)}`;
}

function plot(canvas, xs, series, xlabel) {
  const ctx = canvas.getContext("2d"), w = canvas.width, h = canvas.height, m = 30;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(m, 10, w - m - 10, h - m - 10);
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const ymax = Math.max(...series.flatMap((s) => s.ys.filter(Number.isFinite))) || 1;
  const X = (x) => m + ((x - xmin) / (xmax - xmin || 1)) * (w - m - 10);
  const Y = (y) => h - m - (y / ymax) * (h - m - 20);
  for (const s of series) {
    ctx.strokeStyle = s.colour;
    ctx.beginPath();
    s.ys.forEach((y, k) => (k ? ctx.lineTo(X(xs[k]), Y(y)) : ctx.moveTo(X(xs[k]), Y(y))));
    ctx.stroke();
    ctx.fillStyle = s.colour;
    ctx.fillText(s.label, w - 90, 24 + 14 * series.indexOf(s));
  }
  ctx.fillStyle = "#333";
  ctx.fillText(xlabel, w / 2, h - 8);
}

function run(out, f) {
  try {
    f();
  } catch (e) {
    $(out).textContent = `error: ${e}`;
  }
}

await init();

$("go1").onclick = () => run("out1", () => drawField(JSON.parse(field($("kind").value, +$("n").value, +$("seed1").value))));

$("go2").onclick = () => run("out2", () => {
  const rows = JSON.parse(noise_vs_smooth(64, +$("ell").value, +$("seed2").value));
  const ells = rows.map((r) => r[0]);
  plot($("levels"), ells, [
    { label: "noise", colour: "#c33", ys: rows.map((r) => r[1]) },
    { label: "smooth", colour: "#36c", ys: rows.map((r) => r[2]) },
  ], "level ℓ");
  $("out2").textContent = rows.map((r) => `ℓ=${r[0]}  noise ${r[1].toFixed(4)}  smooth ${r[2].toFixed(4)}`).join("\n");
});

$("go3").onclick = () => run("out3", () => {
  const v = JSON.parse(theta_sweep(+$("step").value, +$("snr").value, +$("seed3").value));
  const norm = (ys) => { const m = Math.max(...ys); return ys.map((y) => y / m); };
  plot($("sweep"), v.theta, [
    { label: "struc", colour: "#c33", ys: norm(v.struc) },
    { label: "L1", colour: "#393", ys: norm(v.l1) },
    { label: "L2", colour: "#36c", ys: norm(v.l2) },
  ], "θ");
  const [cs, c1, c2] = v.contrast.map((c) => (c == null ? "n/a" : c.toFixed(3)));
  $("out3").textContent = `contrast\n  struc ${cs}\n  L1    ${c1}\n  L2    ${c2}`;
});

$("go1").click();
