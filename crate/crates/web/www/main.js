import init, { classical_bound_curve, sharpness_curves, cascade } from './pkg/seqrsp_web.js';

const COLORS = ['#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b'];
const PAD = 40;

function showError(e) {
  document.getElementById('error').textContent = e ? String(e) : '';
}

function frame(ctx, w, h, xr, yr, xlabel) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#888';
  ctx.strokeRect(PAD, 10, w - PAD - 10, h - PAD - 10);
  ctx.fillStyle = '#444';
  ctx.font = '12px system-ui';
  ctx.fillText(xr[0].toFixed(2), PAD, h - PAD + 16);
  ctx.fillText(xr[1].toFixed(2), w - 40, h - PAD + 16);
  ctx.fillText(yr[1].toFixed(2), 4, 20);
  ctx.fillText(yr[0].toFixed(2), 4, h - PAD);
  ctx.fillText(xlabel, w / 2, h - 8);
  const sx = x => PAD + (x - xr[0]) / (xr[1] - xr[0]) * (w - PAD - 10);
  const sy = y => h - PAD - (y - yr[0]) / (yr[1] - yr[0]) * (h - PAD - 20);
  return [sx, sy];
}

function polyline(ctx, pts, sx, sy, color) {
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  let pen = false;
  for (const [x, y] of pts) {
    if (y === null || y > 1) { pen = false; continue; }
    if (pen) ctx.lineTo(sx(x), sy(y)); else ctx.moveTo(sx(x), sy(y));
    pen = true;
  }
  ctx.stroke();
}

function drawBound() {
  const c = document.getElementById('bound');
  const ctx = c.getContext('2d');
  const pts = JSON.parse(classical_bound_curve(301));
  const [sx, sy] = frame(ctx, c.width, c.height, [0, Math.PI], [0.7, 1], 'θ');
  polyline(ctx, pts.map(p => [p.theta, p.bound]), sx, sy, COLORS[0]);
}

function drawCurves() {
  const axis = document.getElementById('axis').value;
  const c = document.getElementById('curves');
  const ctx = c.getContext('2d');
  const pts = JSON.parse(sharpness_curves(axis, 400));
  const xr = [pts[0].x, pts[pts.length - 1].x];
  const [sx, sy] = frame(ctx, c.width, c.height, xr, [0, 1], axis);
  for (let i = 0; i < 6; i++) {
    polyline(ctx, pts.map(p => [p.x, p.lambda_mins[i]]), sx, sy, COLORS[i]);
    ctx.fillStyle = COLORS[i];
    ctx.fillText(`Bob ${i + 1}`, c.width - 60, 24 + 14 * i);
  }
  const best = Math.max(...pts.map(p => p.n));
  document.getElementById('nmax').textContent = `largest n on this axis: ${best}`;
}

function runCascade() {
  const rows = JSON.parse(cascade(
    document.getElementById('family').value,
    parseFloat(document.getElementById('param').value),
    parseFloat(document.getElementById('theta').value),
    document.getElementById('lambdas').value,
  ));
  const table = document.getElementById('result');
  table.innerHTML = '<tr><th>Bob</th><th>λ</th><th>fidelity</th><th>bound</th><th></th></tr>';
  for (const r of rows) {
    const tr = document.createElement('tr');
    const verdict = r.pass ? '<td class="pass">beats bound</td>' : '<td class="fail">classical</td>';
    tr.innerHTML = `<td>${r.index}</td><td>${r.lambda}</td><td>${r.fidelity.toFixed(4)}</td>`
      + `<td>${r.bound.toFixed(4)}</td>${verdict}`;
    table.appendChild(tr);
  }
}

function guarded(f) {
  return () => {
    try { showError(null); f(); } catch (e) { showError(e); }
  };
}

await init();
guarded(drawBound)();
guarded(drawCurves)();
guarded(runCascade)();
document.getElementById('axis').addEventListener('change', guarded(drawCurves));
document.getElementById('run').addEventListener('click', guarded(runCascade));
