import init, { density, rateSvg, jacobiRoots } from "./pkg/soslab_web.js";

const $ = (id) => document.getElementById(id);

function fail(el, e) {
  el.className = "err";
  el.textContent = e.message ?? String(e);
}

function drawDensity() {
  const out = $("d-out");
  out.className = "";
  try {
    const d = density($("d-f").value, Number($("d-r").value), Number($("d-s").value), 200);
    const n = d.grid, vals = d.values(), max = d.max() || 1;
    const canvas = $("d-canvas");
    canvas.width = n;
    canvas.height = n;
    const ctx = canvas.getContext("2d");
    const img = ctx.createImageData(n, n);
    for (let j = 0; j < n; j++) {
      for (let i = 0; i < n; i++) {
        const v = vals[j * n + i] / max;
        // row 0 is the bottom of the square
        const k = 4 * ((n - 1 - j) * n + i);
        img.data[k] = 255;
        img.data[k + 1] = img.data[k + 2] = Math.round(255 * (1 - v));
        img.data[k + 3] = 255;
      }
    }
    ctx.putImageData(img, 0, 0);
    out.textContent = `ub = ${d.ub.toPrecision(12)}, max σ = ${max.toPrecision(6)}`;
    d.free();
  } catch (e) {
    fail(out, e);
  }
}

function drawRates() {
  const out = $("r-out");
  out.className = "";
  out.textContent = "";
  const fmin = $("r-min").value.trim() === "" ? NaN : Number($("r-min").value);
  try {
    $("r-plot").innerHTML = rateSvg($("r-f").value, $("r-m").value, Number($("r-lo").value), Number($("r-hi").value), fmin);
  } catch (e) {
    fail(out, e);
  }
}

function showRoots() {
  const out = $("j-out");
  out.className = "";
  try {
    const r = jacobiRoots(Number($("j-a").value), Number($("j-b").value), Number($("j-k").value));
    out.textContent = Array.from(r, (x) => x.toPrecision(12)).join("\n");
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("d-go").onclick = drawDensity;
$("r-go").onclick = drawRates;
$("j-go").onclick = showRoots;
drawDensity();
drawRates();
showRoots();
