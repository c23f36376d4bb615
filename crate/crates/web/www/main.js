import init, { generate, bounds, solve } from "./pkg/ddp_web.js";

const $ = (id) => document.getElementById(id);

function show(text, isError = false) {
  $("status").textContent = text;
  $("status").className = isError ? "error" : "";
}

function guarded(fn) {
  return () => {
    show("working...");
    // Let the browser paint the message before the solver blocks the thread.
    setTimeout(() => {
      try {
        fn();
      } catch (e) {
        show(String(e.message ?? e), true);
      }
    }, 10);
  };
}

function hue(i) {
  return `hsl(${(i * 137) % 360} 60% 70%)`;
}

function draw(result) {
  const host = $("bins");
  host.replaceChildren();
  const scale = Math.max(1, Math.floor(220 / Math.max(result.width, result.height)));
  for (let b = 1; b <= result.bins; b++) {
    const canvas = document.createElement("canvas");
    canvas.width = result.width * scale;
    canvas.height = result.height * scale;
    canvas.title = `bin ${b}`;
    const ctx = canvas.getContext("2d");
    ctx.font = "10px sans-serif";
    for (const p of result.placements.filter((q) => q.bin === b)) {
      // y grows upwards in the model, downwards on the canvas.
      const y = canvas.height - (p.y + p.h) * scale;
      ctx.fillStyle = p.lateness > 0 ? "#f4a6a6" : hue(p.item);
      ctx.fillRect(p.x * scale, y, p.w * scale, p.h * scale);
      ctx.strokeRect(p.x * scale + 0.5, y + 0.5, p.w * scale - 1, p.h * scale - 1);
      ctx.fillStyle = "#000";
      ctx.fillText(String(p.item), p.x * scale + 3, y + 12);
    }
    host.append(canvas);
  }
}

await init();

$("generate").onclick = guarded(() => {
  $("instance").value = generate(
    Number($("category").value),
    $("class").value,
    Number($("n").value),
    BigInt($("seed").value),
  );
  $("bins").replaceChildren();
  show("generated");
});

$("solve").onclick = guarded(() => {
  const r = JSON.parse(solve($("instance").value, $("method").value, BigInt($("seed").value)));
  draw(r);
  show(`L_max ${r.l_max} in ${r.bins} bins${r.note ? ` (${r.note})` : ""}; late items are shaded red`);
});

$("bounds").onclick = guarded(() => {
  const b = JSON.parse(bounds($("instance").value));
  const lb3 = b.lb3 === null ? "none" : `${b.lb3}${b.lb3_valid ? "" : " (search cut short, not a bound)"}`;
  show(`lb1 ${b.lb1}\nlb3 ${lb3}\nfirst fit ${b.upper}\nconstraint rows ${b.rows}`);
});

$("generate").click();
