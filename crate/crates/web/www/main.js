import init, { ballProfile, shapeAsymmetry, femSolve } from "./pkg/robin_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const fmt = (x) => (x === null || x === undefined ? "n/a" : x.toPrecision(8));

function call(fn, out) {
  const view = JSON.parse(fn());
  if (view.error) {
    out.textContent = view.error;
    out.className = "error";
    return null;
  }
  out.className = "";
  return view;
}

// Maps data bounds onto a canvas with a margin, y pointing up.
function frame(canvas, xmin, xmax, ymin, ymax, square) {
  const pad = 30;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  let sx = w / (xmax - xmin || 1);
  let sy = h / (ymax - ymin || 1);
  if (square) sx = sy = Math.min(sx, sy);
  const ox = pad + (w - sx * (xmax - xmin)) / 2;
  const oy = pad + (h - sy * (ymax - ymin)) / 2;
  return {
    x: (v) => ox + (v - xmin) * sx,
    y: (v) => canvas.height - oy - (v - ymin) * sy,
    scale: sx,
  };
}

function polyline(ctx, xs, ys, f, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(f.x(x), f.y(ys[i])) : ctx.moveTo(f.x(x), f.y(ys[i]))));
  ctx.stroke();
}

function drawBall() {
  const out = $("ball-out");
  const view = call(() => ballProfile(num("ball-n"), num("ball-q"), num("ball-beta"), num("ball-c"), num("ball-eps"), num("ball-r"), 400), out);
  const canvas = $("ball-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!view) return;
  const top = Math.max(...view.psi, ...view.hamiltonian);
  const f = frame(canvas, 0, view.r[view.r.length - 1], 0, top, false);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(f.x(0), f.y(top), f.x(view.r[view.r.length - 1]) - f.x(0), f.y(0) - f.y(top));
  ctx.lineWidth = 2;
  polyline(ctx, view.r, view.psi, f, "#1f6fb2");
  polyline(ctx, view.r, view.hamiltonian, f, "#c0592b");
  ctx.lineWidth = 1;
  ctx.fillStyle = "#1f6fb2";
  ctx.fillText("psi(r)", f.x(0) + 6, f.y(view.psi[0]) - 6);
  ctx.fillStyle = "#c0592b";
  ctx.fillText("H(r)", f.x(0) + 6, f.y(view.hamiltonian[0]) + 14);
  out.textContent = [
    `mode       ${view.mode}`,
    `E          ${fmt(view.energy)}`,
    `dirichlet  ${fmt(view.dirichlet)}`,
    `boundary   ${fmt(view.boundary)}`,
    `bulk       ${fmt(view.bulk)}`,
    `lambda_q   ${fmt(view.lambda_q)}`,
    `psi(0)     ${fmt(view.psi[0])}`,
    `psi(R)     ${fmt(view.psi[view.psi.length - 1])}`,
  ].join("\n");
}

function drawAsymmetry() {
  const out = $("asym-out");
  const view = call(() => shapeAsymmetry($("asym-shape").value, num("asym-k")), out);
  const canvas = $("asym-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!view) return;
  const [cx, cy] = view.ball_center;
  const xs = view.outline.map((p) => p[0]).concat([cx - view.ball_radius, cx + view.ball_radius]);
  const ys = view.outline.map((p) => p[1]).concat([cy - view.ball_radius, cy + view.ball_radius]);
  const f = frame(canvas, Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys), true);
  ctx.fillStyle = "rgba(31, 111, 178, 0.25)";
  ctx.beginPath();
  view.outline.forEach(([x, y], i) => (i ? ctx.lineTo(f.x(x), f.y(y)) : ctx.moveTo(f.x(x), f.y(y))));
  ctx.closePath();
  ctx.fill();
  ctx.strokeStyle = "#1f6fb2";
  ctx.stroke();
  ctx.strokeStyle = "#c0592b";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.arc(f.x(cx), f.y(cy), view.ball_radius * f.scale, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
  out.textContent = [
    `area         ${fmt(view.area)}`,
    `perimeter    ${fmt(view.perimeter)}`,
    `iso deficit  ${fmt(view.iso_deficit)}`,
    `asymmetry    ${fmt(view.asymmetry)}`,
    `best ball    (${fmt(cx)}, ${fmt(cy)}), r = ${fmt(view.ball_radius)}`,
    view.tie ? "two grid centers tie within 1e-6" : "",
  ].join("\n");
}

// Blue to red through white.
function color(t) {
  const s = Math.max(0, Math.min(1, t));
  const r = s < 0.5 ? 2 * s : 1;
  const b = s < 0.5 ? 1 : 2 * (1 - s);
  const g = 1 - Math.abs(2 * s - 1);
  return `rgb(${Math.round(255 * (0.2 + 0.8 * r))}, ${Math.round(255 * (0.2 + 0.8 * g))}, ${Math.round(255 * (0.2 + 0.8 * b))})`;
}

function drawFem() {
  const out = $("fem-out");
  out.textContent = "solving...";
  const view = call(() => femSolve($("fem-shape").value, num("fem-q"), num("fem-beta"), num("fem-c"), num("fem-nr"), num("fem-nt")), out);
  const canvas = $("fem-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!view) return;
  const v = view.vertices;
  const xs = v.filter((_, i) => i % 2 === 0);
  const ys = v.filter((_, i) => i % 2 === 1);
  const f = frame(canvas, Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys), true);
  const span = view.sup_u - view.inf_u || 1;
  for (let t = 0; t < view.triangles.length; t += 3) {
    const [a, b, c] = [view.triangles[t], view.triangles[t + 1], view.triangles[t + 2]];
    const mean = (view.values[a] + view.values[b] + view.values[c]) / 3;
    ctx.fillStyle = ctx.strokeStyle = color((mean - view.inf_u) / span);
    ctx.beginPath();
    ctx.moveTo(f.x(v[2 * a]), f.y(v[2 * a + 1]));
    ctx.lineTo(f.x(v[2 * b]), f.y(v[2 * b + 1]));
    ctx.lineTo(f.x(v[2 * c]), f.y(v[2 * c + 1]));
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
  out.textContent = [
    `E           ${fmt(view.energy)}`,
    `lambda_q    ${fmt(view.lambda_q)}`,
    `inf u       ${fmt(view.inf_u)}`,
    `sup u       ${fmt(view.sup_u)}`,
    `iterations  ${view.iterations}${view.converged ? "" : " (not converged)"}`,
    `vertices    ${view.values.length}`,
  ].join("\n");
}

await init();
$("ball-go").onclick = drawBall;
$("asym-go").onclick = drawAsymmetry;
$("fem-go").onclick = drawFem;
drawBall();
drawAsymmetry();
drawFem();
