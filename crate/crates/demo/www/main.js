import init, { mesh, solve, converge } from "./pkg/layerfem_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);

function parseReal(text) {
  const s = text.trim();
  const parts = s.split("/");
  const v = parts.length === 2 ? Number(parts[0]) / Number(parts[1]) : Number(s);
  if (!Number.isFinite(v)) throw new Error(`'${s}' is not a number`);
  return v;
}

function problem() {
  return { scenario: $("scenario").value, eps0: parseReal($("eps0").value), h: parseReal($("h").value) };
}

// Minimal axes: maps data to pixels with optional log scaling per axis.
function axes(canvas, xr, yr, { logX = false, logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const pad = { l: 70, r: 15, t: 15, b: 35 };
  const w = canvas.width - pad.l - pad.r;
  const hgt = canvas.height - pad.t - pad.b;
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const [x0, x1] = xr.map(tx);
  const [y0, y1] = yr.map(ty);
  const px = (v) => pad.l + ((tx(v) - x0) / (x1 - x0 || 1)) * w;
  const py = (v) => pad.t + hgt - ((ty(v) - y0) / (y1 - y0 || 1)) * hgt;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, hgt);
  ctx.fillStyle = "#333";
  ctx.font = "12px sans-serif";
  const ticks = (lo, hi, log) => {
    if (log) {
      const out = [];
      for (let k = Math.ceil(lo); k <= Math.floor(hi); k++) out.push(10 ** k);
      return out;
    }
    return [0, 0.25, 0.5, 0.75, 1].map((t) => lo + t * (hi - lo));
  };
  const label = (v) => (Math.abs(v) >= 1e-2 && Math.abs(v) < 1e3) || v === 0 ? String(+v.toPrecision(3)) : v.toExponential(0);
  ctx.textAlign = "center";
  for (const v of ticks(x0, x1, logX)) ctx.fillText(label(v), px(v), pad.t + hgt + 18);
  ctx.textAlign = "right";
  for (const v of ticks(y0, y1, logY)) ctx.fillText(label(v), pad.l - 6, py(v) + 4);
  return { ctx, px, py };
}

function line(ax, xs, ys, color, dots = false) {
  const { ctx, px, py } = ax;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.beginPath();
  let started = false;
  xs.forEach((x, i) => {
    const y = ys[i];
    if (y == null || !Number.isFinite(px(x)) || !Number.isFinite(py(y))) return;
    if (started) ctx.lineTo(px(x), py(y));
    else ctx.moveTo(px(x), py(y));
    started = true;
    if (dots) ctx.fillRect(px(x) - 2, py(y) - 2, 4, 4);
  });
  ctx.stroke();
}

function report(id, fn) {
  const el = $(id);
  try {
    el.className = "info";
    el.textContent = fn();
  } catch (e) {
    el.className = "info error";
    el.textContent = String(e.message ?? e);
  }
}

function drawMesh() {
  report("mesh-info", () => {
    const p = problem();
    const m = JSON.parse(mesh(p.scenario, p.eps0, p.h));
    const x = m.nodes.slice(1);
    const spacing = x.map((v, i) => v - m.nodes[i]);
    const ax = axes($("mesh-plot"), [x[0], 1], [Math.min(...spacing), Math.max(...spacing)], { logX: true, logY: true });
    line(ax, x, spacing, COLORS[0], true);
    const { ctx, px } = ax;
    ctx.strokeStyle = "#888";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(px(m.tau), 15);
    ctx.lineTo(px(m.tau), $("mesh-plot").height - 35);
    ctx.stroke();
    ctx.setLineDash([]);
    return `${m.nodes.length} nodes (${m.n_star} graded steps, prediction ${m.predicted.toFixed(1)}), ` +
      `tau* = ${m.tau_star.toExponential(4)}, tau = ${m.tau.toExponential(4)}; plot: element width vs right node`;
  });
}

function drawSolution() {
  report("solve-info", () => {
    const p = problem();
    const s = JSON.parse(solve(p.scenario, p.eps0, p.h));
    const logX = $("solve-log").checked;
    const xs = logX ? s.nodes.slice(1) : s.nodes;
    const ys = logX ? s.values.slice(1) : s.values;
    const all = s.exact ? ys.concat(s.exact[1]) : ys;
    const ax = axes($("solve-plot"), [xs[0], 1], [Math.min(0, ...all), Math.max(...all)], { logX });
    if (s.exact) {
      const [ex, ey] = s.exact;
      const keep = ex.map((x) => !logX || x >= xs[0]);
      line(ax, ex.filter((_, i) => keep[i]), ey.filter((_, i) => keep[i]), COLORS[1]);
    }
    line(ax, xs, ys, COLORS[0], true);
    return `${s.nodes.length} nodes, energy-norm error ${s.energy_error.toExponential(4)} (${s.reference} reference)` +
      (s.exact ? "; red: exact solution" : "");
  });
}

function drawConvergence() {
  report("conv-info", () => {
    const scenario = $("scenario").value;
    const eps0 = $("conv-eps0").value.split(",").map(parseReal);
    const levels = Number($("conv-levels").value);
    const c = JSON.parse(converge(scenario, new Float64Array(eps0), parseReal($("conv-h").value), levels));
    const errs = c.energy_error.flat().filter((v) => v != null);
    if (errs.length === 0) throw new Error("every cell was skipped");
    const ax = axes($("conv-plot"), [c.h[c.h.length - 1], c.h[0]], [Math.min(...errs), Math.max(...errs)], { logX: true, logY: true });
    c.eps0.forEach((e, i) => line(ax, c.h, c.energy_error[i], COLORS[i % COLORS.length], true));
    const rates = c.eps0.map((e, i) => {
      const last = c.rate[i].filter((r) => r != null).pop();
      return `eps0=${e.toExponential(0)}: final rate ${last == null ? "-" : last.toFixed(3)}`;
    });
    return rates.join("; ");
  });
}

await init();
$("run-mesh").addEventListener("click", drawMesh);
$("run-solve").addEventListener("click", drawSolution);
$("solve-log").addEventListener("change", drawSolution);
$("run-conv").addEventListener("click", drawConvergence);
drawMesh();
drawSolution();
drawConvergence();
