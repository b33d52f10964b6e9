import init, { describe_phantom, fusion_landscape, lda_scatter } from "./pkg/neatboost_web.js";

const COLORS = ["#2a7ab0", "#d0542c", "#3c9a48"];
const $ = (id) => document.getElementById(id);

function drawPhantom(d) {
  const canvas = $("img");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(d.width, d.height);
  for (let i = 0; i < d.pixels.length; i++) {
    const v = d.pixels[i];
    const edge = d.mask[i] && (!d.mask[i - 1] || !d.mask[i + 1] || !d.mask[i - d.width] || !d.mask[i + d.width]);
    img.data.set(edge ? [255, 200, 0, 255] : [v, v, v, 255], i * 4);
  }
  const off = new OffscreenCanvas(d.width, d.height);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
  $("features").innerHTML = d.features
    .map(([name, v]) => `<tr><td>${name}</td><td>${v.toFixed(4)}</td></tr>`)
    .join("");
}

function updatePhantom() {
  const d = JSON.parse(describe_phantom(+$("core").value, $("stri").value / 100, +$("angle").value));
  drawPhantom(d);
}

function drawLandscape(l) {
  const c = $("land");
  const ctx = c.getContext("2d");
  const pad = 30;
  const w = c.width - 2 * pad;
  const h = c.height - 2 * pad;
  const lo = Math.min(...l.f1) - 0.02;
  const hi = Math.max(...l.f1) + 0.02;
  const y = (v) => pad + h - ((v - lo) / (hi - lo)) * h;
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#555";
  ctx.fillText("mlp only", pad, c.height - 8);
  ctx.fillText("gbdt only", pad + w - 48, c.height - 8);
  ctx.fillText(hi.toFixed(3), 0, pad + 4);
  ctx.fillText(lo.toFixed(3), 0, pad + h);
  ctx.strokeStyle = COLORS[0];
  ctx.beginPath();
  l.weights.forEach((wt, i) => {
    const px = pad + wt * w;
    i ? ctx.lineTo(px, y(l.f1[i])) : ctx.moveTo(px, y(l.f1[i]));
  });
  ctx.stroke();
  ctx.fillStyle = COLORS[1];
  ctx.beginPath();
  ctx.arc(pad + l.optimum_weight * w, y(l.optimum_f1), 4, 0, 2 * Math.PI);
  ctx.fill();
  $("lsummary").textContent =
    `gbdt OOF weighted F1   ${l.gbdt_f1.toFixed(4)}\n` +
    `mlp OOF weighted F1    ${l.mlp_f1.toFixed(4)}\n` +
    `optimized weight       ${l.optimum_weight.toFixed(3)}\n` +
    `ensemble weighted F1   ${l.optimum_f1.toFixed(4)}`;
}

function runLandscape() {
  $("lsummary").textContent = "training...";
  setTimeout(() => {
    try {
      drawLandscape(JSON.parse(fusion_landscape(+$("ln").value, +$("lsep").value, +$("lseed").value)));
    } catch (e) {
      $("lsummary").textContent = String(e);
    }
  }, 10);
}

function drawScatter(s) {
  const c = $("scatter");
  const ctx = c.getContext("2d");
  const xs = s.points.map((p) => p[0]);
  const ys = s.points.map((p) => p[1]);
  const [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  const pad = 20;
  const sx = (v) => pad + ((v - x0) / (x1 - x0 || 1)) * (c.width - 2 * pad);
  const sy = (v) => c.height - pad - ((v - y0) / (y1 - y0 || 1)) * (c.height - 2 * pad);
  ctx.clearRect(0, 0, c.width, c.height);
  for (const [a, b, k] of s.points) {
    ctx.fillStyle = COLORS[k];
    ctx.fillRect(sx(a) - 2, sy(b) - 2, 4, 4);
  }
  s.classes.forEach((name, k) => {
    ctx.fillStyle = COLORS[k];
    ctx.fillText(name, 8, 14 + 14 * k);
  });
  const ev = s.explained_variance_ratio.map((r) => (100 * r).toFixed(1) + "%").join(" / ");
  $("ssummary").textContent =
    `explained variance  ${ev}\n\ntop features by ANOVA F\n` +
    s.top_features.map(([n, f]) => `  ${n.padEnd(24)} ${f.toFixed(1)}`).join("\n");
}

function updateScatter() {
  try {
    drawScatter(JSON.parse(lda_scatter(+$("sn").value, $("ssep").value / 10, +$("sseed").value)));
  } catch (e) {
    $("ssummary").textContent = String(e);
  }
}

await init();
$("status").textContent = "";
for (const id of ["core", "stri", "angle"]) $(id).addEventListener("input", updatePhantom);
for (const id of ["sn", "ssep", "sseed"]) $(id).addEventListener("input", updateScatter);
$("lrun").addEventListener("click", runLandscape);
updatePhantom();
updateScatter();
runLandscape();
