import init, { wasm_distribution, wasm_sweep, wasm_report } from "./pkg/herald_demo.js";

const $ = (id) => document.getElementById(id);

function controls() {
  return {
    scheme: $("scheme").value,
    coupling: parseFloat($("coupling").value),
    input: $("input").value,
    event: $("event").value,
    ancDim: parseInt($("ancdim").value, 10),
    seed: parseInt($("seed").value, 10),
  };
}

function clearCanvas(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function axisColor() {
  return matchMedia("(prefers-color-scheme: dark)").matches ? "#bbb" : "#444";
}

function drawBars(canvas, probabilities) {
  const ctx = clearCanvas(canvas);
  const W = canvas.width, H = canvas.height;
  const pad = { l: 40, r: 8, t: 10, b: 26 };
  const n = Math.max(probabilities.length, 1);
  const barW = (W - pad.l - pad.r) / n;
  const maxP = Math.max(...probabilities, 1e-12);
  ctx.strokeStyle = axisColor();
  ctx.strokeRect(pad.l, pad.t, W - pad.l - pad.r, H - pad.t - pad.b);
  ctx.fillStyle = "#4d7fd1";
  probabilities.forEach((p, m) => {
    const h = (H - pad.t - pad.b) * (p / maxP);
    ctx.fillRect(pad.l + m * barW + 1, H - pad.b - h, Math.max(barW - 2, 1), h);
  });
  ctx.fillStyle = axisColor();
  ctx.font = "11px system-ui";
  const step = n > 16 ? Math.ceil(n / 16) : 1;
  for (let m = 0; m < n; m += step) {
    ctx.fillText(String(m), pad.l + m * barW + barW / 2 - 4, H - 10);
  }
  ctx.fillText(maxP.toPrecision(3), 2, pad.t + 10);
  ctx.fillText("photons counted", W / 2 - 40, H - 0.5);
}

function drawSweep(canvas, rows) {
  const ctx = clearCanvas(canvas);
  const W = canvas.width, H = canvas.height;
  const pad = { l: 40, r: 8, t: 10, b: 26 };
  ctx.strokeStyle = axisColor();
  ctx.strokeRect(pad.l, pad.t, W - pad.l - pad.r, H - pad.t - pad.b);
  const xs = rows.map((r) => r.coupling);
  const xMax = Math.max(...xs);
  const toX = (x) => pad.l + (W - pad.l - pad.r) * (x / xMax);
  const toY = (p) => H - pad.b - (H - pad.t - pad.b) * p;
  const line = (key, color) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    rows.forEach((r, i) => {
      const x = toX(r.coupling), y = toY(Math.min(Math.max(r[key], 0), 1));
      if (i === 0) ctx.moveTo(x, y); else ctx.lineTo(x, y);
    });
    ctx.stroke();
  };
  line("p0_exact", "#4d7fd1");
  line("p0_paper_form", "#d1824d");
  ctx.fillStyle = axisColor();
  ctx.font = "11px system-ui";
  ctx.fillText("1", pad.l - 12, toY(1) + 4);
  ctx.fillText("0", pad.l - 12, toY(0) + 4);
  ctx.fillText("coupling", W / 2 - 20, H - 0.5);
  ctx.fillStyle = "#4d7fd1";
  ctx.fillText("exact pipeline", pad.l + 8, pad.t + 14);
  ctx.fillStyle = "#d1824d";
  ctx.fillText("printed closed form (for comparison)", pad.l + 8, pad.t + 28);
}

function outcomeText(report) {
  const o = report.outcome;
  if (o === "no_loss") return "no photons counted — signal heralded intact";
  if (typeof o === "object" && "ancilla_loss" in o) {
    const fixed = report.recovery_applied ? " — parity correction applied" : "";
    return `one click on ancilla mode ${o.ancilla_loss + 1} — ancilla lost a photon${fixed}`;
  }
  if (o === "info_loss_detected") return "even photon burst — information photon lost";
  return "ambiguous record (truncation artifact)";
}

function refresh() {
  const c = controls();
  $("couplingValue").textContent = c.coupling.toFixed(2);
  $("seedValue").textContent = String(c.seed);
  $("error").textContent = "";
  try {
    const dist = JSON.parse(wasm_distribution(c.scheme, c.coupling, c.input, c.event, c.ancDim));
    drawBars($("distChart"), dist.probabilities);
    $("summary").textContent = [
      `P(no clicks)           ${dist.p_zero.toPrecision(8)}`,
      `mean ancilla photons   ${dist.mean_count.toPrecision(6)}`,
      `loss-branch weight     ${dist.branch_probability.toPrecision(6)}`,
      ``,
      `classification rates`,
      `  heralded intact      ${dist.rates.no_loss.toPrecision(6)}`,
      `  ancilla loss         ${dist.rates.ancilla_loss.toPrecision(6)}`,
      `  information loss     ${dist.rates.info_loss.toPrecision(6)}`,
      `  ambiguous            ${dist.rates.ambiguous.toExponential(2)}`,
    ].join("\n");

    const sweep = JSON.parse(wasm_sweep(c.scheme, 0.5, 30, c.input, c.ancDim));
    drawSweep($("sweepChart"), sweep.rows);

    const report = JSON.parse(wasm_report(c.scheme, c.coupling, c.input, c.event, c.seed));
    $("outcome").textContent = outcomeText(report);
    $("report").textContent = JSON.stringify(report, null, 2);
  } catch (err) {
    $("error").textContent = String(err);
  }
}

async function main() {
  await init();
  for (const id of ["scheme", "coupling", "input", "event", "ancdim", "seed"]) {
    $(id).addEventListener("input", refresh);
  }
  refresh();
}

main();
