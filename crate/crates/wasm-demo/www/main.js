import init, { density_curves, moment_table, perturbation_gaps } from "./pkg/level_density_wasm.js";

const $ = (id) => document.getElementById(id);

function ensemble() {
  return [$("family").value, Number($("a").value), Number($("b").value)];
}

function guard(target, f) {
  try {
    f();
  } catch (e) {
    target.innerHTML = `<span class="error">${e}</span>`;
  }
}

function drawCurves(data) {
  const canvas = $("plot");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 30;
  ctx.clearRect(0, 0, width, height);
  const xs = data.x;
  const series = [data.finite, data.limit].filter(Boolean);
  const finite = (v) => Number.isFinite(v) ? v : 0;
  // Cap the vertical range so integrable edge singularities do not flatten the plot.
  const top = Math.min(3, Math.max(...series.flat().map(finite))) * 1.05;
  const sx = (x) => pad + (x - xs[0]) / (xs[xs.length - 1] - xs[0]) * (width - 2 * pad);
  const sy = (y) => height - pad - Math.min(finite(y), top) / top * (height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, height - pad);
  ctx.lineTo(width - pad, height - pad);
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText(xs[0].toFixed(2), pad, height - 10);
  ctx.fillText(xs[xs.length - 1].toFixed(2), width - pad - 30, height - 10);
  ctx.fillText(top.toFixed(2), 2, pad);
  const colors = ["#1f5fbf", "#d0602a"];
  series.forEach((ys, s) => {
    ctx.strokeStyle = colors[s];
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(sx(xs[i]), sy(y)) : ctx.moveTo(sx(xs[i]), sy(y))));
    ctx.stroke();
  });
  $("density-note").textContent =
    `${data.label}, n = ${data.n}, D_n = ${data.D_n.toPrecision(6)}. Blue: σ_n. ` +
    (data.limit ? `Orange: ${data.limit_name} law.` : "");
}

function updateDensity() {
  const n = Number($("n").value);
  $("n-value").textContent = n;
  guard($("density-note"), () => drawCurves(JSON.parse(density_curves(...ensemble(), n, 600))));
}

function table(rows, columns) {
  const head = columns.map((c) => `<th>${c}</th>`).join("");
  const body = rows
    .map((r) => "<tr>" + columns.map((c) => {
      const v = r[c];
      return `<td>${typeof v === "number" && !Number.isInteger(v) ? v.toExponential(6) : v}</td>`;
    }).join("") + "</tr>")
    .join("");
  return `<table><tr>${head}</tr>${body}</table>`;
}

function updateMoments() {
  guard($("moments"), () => {
    const rows = JSON.parse(moment_table(...ensemble(), $("ns").value, Number($("kmax").value)));
    $("moments").innerHTML = table(rows, ["n", "k", "M_n_k", "M_limit", "gap"]);
  });
}

function updateGaps() {
  guard($("gaps"), () => {
    const rows = JSON.parse(perturbation_gaps(...ensemble(), $("p").value, $("gap-ns").value, Number($("gap-k").value)));
    rows.forEach((r) => (r["n·gap"] = r.n * r.gap));
    $("gaps").innerHTML = table(rows, ["n", "k", "M_n_k", "M_hat_n_k", "gap", "n·gap"]);
  });
}

await init();
$("n").addEventListener("input", updateDensity);
for (const id of ["family", "a", "b"]) $(id).addEventListener("change", updateDensity);
$("moments-go").addEventListener("click", updateMoments);
$("gaps-go").addEventListener("click", updateGaps);
updateDensity();
updateMoments();
