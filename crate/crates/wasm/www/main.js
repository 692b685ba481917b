import init, { bifset, portrait, sphere } from "./pkg/btmem_wasm.js";

const COLORS = {
  "SN+": "#1f77b4", "SN-": "#1f77b4", "H": "#d62728",
  "het+": "#2ca02c", "het-": "#2ca02c", "hom+": "#9467bd", "hom-": "#9467bd",
};
const $ = (id) => document.getElementById(id);

function bounds(lines) {
  let b = [Infinity, -Infinity, Infinity, -Infinity];
  for (const pts of lines) for (const [x, y] of pts) {
    b = [Math.min(b[0], x), Math.max(b[1], x), Math.min(b[2], y), Math.max(b[3], y)];
  }
  const px = 0.05 * (b[1] - b[0] || 1), py = 0.05 * (b[3] - b[2] || 1);
  return [b[0] - px, b[1] + px, b[2] - py, b[3] + py];
}

function view(canvas, b) {
  const { width: w, height: h } = canvas;
  return {
    to: ([x, y]) => [(x - b[0]) / (b[1] - b[0]) * w, h - (y - b[2]) / (b[3] - b[2]) * h],
    from: (px, py) => [b[0] + px / w * (b[1] - b[0]), b[2] + (h - py) / h * (b[3] - b[2])],
  };
}

function polyline(ctx, v, pts, color, width = 1.5) {
  ctx.strokeStyle = color; ctx.lineWidth = width; ctx.beginPath();
  pts.forEach((p, i) => { const [x, y] = v.to(p); i ? ctx.lineTo(x, y) : ctx.moveTo(x, y); });
  ctx.stroke();
}

let diagramView = null;

function drawDiagram() {
  const mu3 = +$("mu3").value;
  let d;
  try { d = JSON.parse(bifset(mu3, +$("res").value)); } catch (e) { $("info").textContent = String(e); return; }
  const c = $("diagram"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  diagramView = view(c, bounds(d.curves.map((k) => k.points)));
  for (const k of d.curves) polyline(ctx, diagramView, k.points, COLORS[k.label] || "#333");
  ctx.fillStyle = "#000";
  for (const [label, m2, m1] of d.points) {
    const [x, y] = diagramView.to([m2, m1]);
    ctx.fillRect(x - 2, y - 2, 4, 4);
    ctx.fillText(label, x + 4, y - 4);
  }
  ctx.fillText("mu2 →, mu1 ↑", 6, 14);
  $("info").textContent = `mu3 = ${mu3}: ${d.curves.length} curves, ${d.points.length} special points`;
}

function drawPortrait(mu1, mu2) {
  const mu3 = +$("mu3").value;
  let p;
  try { p = JSON.parse(portrait(mu1, mu2, mu3, 40)); } catch (e) { $("info").textContent = String(e); return; }
  const c = $("portrait"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const all = p.orbits.concat(p.cycle).map((o) => o.points);
  all.push(p.equilibria.map(([x]) => [x, 0]));
  const v = view(c, bounds(all));
  for (const o of p.orbits) polyline(ctx, v, o.points, o.label === "stable" ? "#1f77b4" : "#d62728", 1);
  for (const o of p.cycle) polyline(ctx, v, o.points, "#2ca02c", 2.5);
  for (const [x, kind] of p.equilibria) {
    const [px, py] = v.to([x, 0]);
    ctx.fillStyle = "#000"; ctx.beginPath(); ctx.arc(px, py, 3, 0, 2 * Math.PI); ctx.fill();
    ctx.fillText(kind, px + 4, py - 4);
  }
  $("info").textContent =
    `mu = (${mu1.toExponential(3)}, ${mu2.toFixed(4)}, ${mu3}) region ${p.region}` +
    (p.cycle.length ? ", limit cycle found" : p.has_limit_cycle ? ", limit cycle expected" : "");
}

function drawSphere() {
  let s;
  try { s = JSON.parse(sphere(+$("ma").value, +$("mb").value, +$("mbeta").value, +$("mxi").value, +$("mn").value)); }
  catch (e) { $("sphereInfo").textContent = String(e); return; }
  const c = $("sphereCanvas"), ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  // Oblique projection of (x, y, z).
  const proj = ([x, y, z]) => [x + 0.5 * z, y + 0.35 * z];
  const lines = s.slices.map((sl) => sl.points.map(proj));
  const v = view(c, bounds(lines));
  const n = Math.max(lines.length - 1, 1);
  lines.forEach((pts, i) => polyline(ctx, v, pts, `hsl(${240 * i / n}, 70%, 45%)`));
  $("sphereInfo").textContent =
    `h in (${s.h_range[0].toFixed(3)}, ${s.h_range[1].toFixed(3)}), ` +
    `${s.slices.length} closed orbits, ${s.skipped} leaves skipped`;
}

await init();
$("draw").onclick = drawDiagram;
$("sphere").onclick = drawSphere;
$("diagram").onclick = (ev) => {
  if (!diagramView) return;
  const r = ev.target.getBoundingClientRect();
  const [mu2, mu1] = diagramView.from(ev.clientX - r.left, ev.clientY - r.top);
  drawPortrait(mu1, mu2);
};
drawDiagram();
