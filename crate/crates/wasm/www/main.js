import init, { taylorZeros, errorSweep, orderScan, schemeNames } from "./pkg/trotterkit_wasm.js";

const $ = (id) => document.getElementById(id);

function report(err) {
  $("status").textContent = String(err);
  $("status").className = "err";
}

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.lineWidth = 1;
}

function drawZeros(data) {
  const cv = $("zplot");
  const ctx = cv.getContext("2d");
  const w = cv.width, h = cv.height;
  // w-plane window: re in [-0.4, 1.1], im in [-0.7, 0.7]
  const sx = (re) => ((re + 0.4) / 1.5) * w;
  const sy = (im) => h / 2 - (im / 1.4) * h;
  axes(ctx, w, h);
  ctx.beginPath();
  ctx.moveTo(0, sy(0)); ctx.lineTo(w, sy(0));
  ctx.moveTo(sx(0), 0); ctx.lineTo(sx(0), h);
  ctx.stroke();

  ctx.strokeStyle = "#3a7";
  ctx.lineWidth = 1.5;
  for (const sign of [1, -1]) {
    ctx.beginPath();
    data.szego.forEach(([re, im], i) => {
      const x = sx(re), y = sy(sign * im);
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  ctx.fillStyle = "#c33";
  for (const [re, im] of data.normalized) {
    ctx.beginPath();
    ctx.arc(sx(re), sy(im), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("zinfo").textContent = `min |z|/k = ${data.min_modulus_over_k.toFixed(4)}`;
}

function drawSweep(points) {
  const cv = $("splot");
  const ctx = cv.getContext("2d");
  const w = cv.width, h = cv.height, pad = 40;
  axes(ctx, w, h);
  const floor = 1e-18;
  const logs = points.flatMap((p) => [p.err_sum, p.err_prod]).map((e) => Math.log10(Math.max(e, floor)));
  const lo = Math.floor(Math.min(...logs)), hi = Math.ceil(Math.max(...logs));
  const x0 = points[0].x, x1 = points[points.length - 1].x;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (e) => h - pad - ((Math.log10(Math.max(e, floor)) - lo) / Math.max(hi - lo, 1)) * (h - 2 * pad);

  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (let d = lo; d <= hi; d += Math.max(1, Math.round((hi - lo) / 6))) {
    const y = sy(10 ** d);
    ctx.beginPath(); ctx.moveTo(pad, y); ctx.lineTo(w - pad, y); ctx.stroke();
    ctx.fillText(`1e${d}`, 2, y + 4);
  }
  ctx.fillText(String(x0), sx(x0) - 8, h - pad + 16);
  ctx.fillText(String(x1), sx(x1) - 8, h - pad + 16);

  const series = [["err_sum", "#c33", "summed"], ["err_prod", "#37c", "factorized"]];
  series.forEach(([key, colour, name], s) => {
    ctx.strokeStyle = colour;
    ctx.lineWidth = 2;
    ctx.beginPath();
    points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(sx(p.x), sy(p[key])); else ctx.lineTo(sx(p.x), sy(p[key]));
    });
    ctx.stroke();
    ctx.fillStyle = colour;
    ctx.fillText(name, w - pad - 70, pad + 14 * s);
  });
}

async function main() {
  await init();
  for (const name of JSON.parse(schemeNames())) {
    const opt = document.createElement("option");
    opt.value = opt.textContent = name;
    $("oscheme").appendChild(opt);
  }
  $("oscheme").value = "forest-ruth";

  const run = (fn) => () => {
    $("status").textContent = "";
    try { fn(); } catch (e) { report(e); }
  };

  $("zgo").onclick = run(() => drawZeros(JSON.parse(taylorZeros(Number($("zk").value)))));
  $("sgo").onclick = run(() =>
    drawSweep(JSON.parse(errorSweep(Number($("sk").value), Number($("sx0").value), Number($("sx1").value), 200))));
  $("ogo").onclick = run(() => {
    const r = JSON.parse(orderScan($("oscheme").value, Number($("olambda").value), Number($("odim").value),
      Number($("oseed").value)));
    const rows = r.points.map(([h, e]) => `  h = ${h.toExponential(3)}   error = ${e.toExponential(3)}`).join("\n");
    $("oout").textContent = `${r.scheme}, Λ = ${r.stages}, claimed order ${r.claimed_order}\n` +
      `fitted slope ${r.slope.toFixed(3)}\n${rows}`;
  });

  $("zgo").click();
  $("sgo").click();
}

main().catch(report);
