import init, { tiling, wilber, shift_graph } from "./pkg/verikit_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseInt($(id).value, 10);
const palette = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f"];

function verdict(el, ok, text) {
  el.className = ok ? "holds" : "violated";
  el.textContent = text;
}

function call(fn, ...args) {
  const r = JSON.parse(fn(...args));
  if (r.error) throw new Error(r.error);
  return r;
}

function drawArcs(ctx, y, arcs, color, w) {
  ctx.fillStyle = color;
  for (const [a, b] of arcs) {
    ctx.fillRect(20 + a * w, y, Math.max(1, (b - a) * w), 14);
  }
}

function runTiling() {
  const ctx = $("tcanvas").getContext("2d");
  ctx.clearRect(0, 0, 860, 220);
  try {
    const r = call(tiling, num("tp"), num("tq"), num("tr"), num("td"), num("tsn"), num("tsd"));
    verdict($("tverdict"), r.holds, r.holds ? `tiles (ε = ${r.epsilon})` : "does not tile");
    const w = 820;
    ctx.fillStyle = "#000";
    ctx.fillText("fibres", 20, 12);
    r.fibers.forEach((f, i) => drawArcs(ctx, 16 + i * 16, f.arcs, palette[i], w));
    r.residues.forEach((res, k) => {
      const y = 80 + k * 46;
      ctx.fillStyle = "#000";
      ctx.fillText(`residue ${res.residue}: ${res.partition ? "partition" : "fails"}`, 20, y - 2);
      res.shifted.forEach((s, i) => drawArcs(ctx, y, s.arcs, palette[i], w));
      if (res.witness) {
        const [a, b] = res.witness.arc;
        ctx.strokeStyle = "#a31515";
        ctx.strokeRect(20 + a * w - 2, y - 2, Math.max(3, (b - a) * w) + 4, 18);
      }
    });
    $("tout").textContent = JSON.stringify(r.residues.map((x) => ({ residue: x.residue, alpha: x.alpha, witness: x.witness })), null, 2);
  } catch (e) {
    verdict($("tverdict"), false, e.message);
  }
}

function runWilber() {
  const ctx = $("wcanvas").getContext("2d");
  ctx.clearRect(0, 0, 860, 180);
  try {
    const r = call(wilber, num("ws"), num("wn"), num("wl"));
    verdict($("wverdict"), r.holds && r.decomposition_holds,
      `W(merged) = ${r.w_merged} ≤ W(red) + W(blue) + bound = ${r.w_red} + ${r.w_blue} + ${r.bound}`);
    const dx = 820 / Math.max(1, r.items.length);
    r.items.forEach(([key, color], t) => {
      ctx.fillStyle = color === "red" ? "#d62728" : "#1f77b4";
      ctx.fillRect(20 + t * dx, 170 - (key / r.n) * 160, Math.max(2, dx - 1), 3);
    });
    $("wout").textContent = JSON.stringify(r.intervals.slice(0, 40), null, 1);
  } catch (e) {
    verdict($("wverdict"), false, e.message);
  }
}

function runShift() {
  const ctx = $("scanvas").getContext("2d");
  ctx.clearRect(0, 0, 420, 420);
  try {
    const r = call(shift_graph, num("sm"));
    verdict($("sverdict"), true, `χ = ${r.chi} on ${r.vertices.length} pairs`);
    const n = r.vertices.length;
    const pos = r.vertices.map((_, i) => [210 + 180 * Math.cos((2 * Math.PI * i) / n), 210 + 180 * Math.sin((2 * Math.PI * i) / n)]);
    ctx.strokeStyle = "#bbb";
    for (const [u, v] of r.edges) {
      ctx.beginPath();
      ctx.moveTo(...pos[u]);
      ctx.lineTo(...pos[v]);
      ctx.stroke();
    }
    r.vertices.forEach((p, i) => {
      ctx.fillStyle = palette[r.colors[i] % palette.length];
      ctx.beginPath();
      ctx.arc(pos[i][0], pos[i][1], 11, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#000";
      ctx.fillText(`${p[0]},${p[1]}`, pos[i][0] - 8, pos[i][1] + 4);
    });
  } catch (e) {
    verdict($("sverdict"), false, e.message);
  }
}

await init();
$("trun").onclick = runTiling;
$("wrun").onclick = runWilber;
$("srun").onclick = runShift;
runTiling();
runWilber();
runShift();
