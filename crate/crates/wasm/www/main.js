import init, { track_agent, surprise_week, contact_network } from "./pkg/officelab_wasm.js";

const $ = (id) => document.getElementById(id);
const TAG_COLORS = {
  corridor: "#ddd", office: "#cfe0f5", meeting_room: "#f5d6a8", printer: "#d9c2ef",
  lunch_area: "#bfe8bf", other: "#eee",
};
const DEPT_COLORS = { Research: "#1f77b4", Development: "#2ca02c", Workshops: "#d62728", Administration: "#9467bd", other: "#777" };

function call(fn, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

function report(el, f) {
  try {
    el.className = "";
    f();
  } catch (e) {
    el.textContent = e.message;
    el.className = "err";
  }
}

// Corridor bins form a row; offices stack above their door, the one shared
// room per door hangs below.
function layout(floor, w) {
  const corridors = floor.filter((b) => b.tag === "corridor").length;
  const step = w / corridors;
  const above = {};
  return floor.map((b) => {
    const x = step * (b.door + 0.5);
    if (b.tag === "corridor") return { ...b, x, y: 220 };
    if (b.tag === "office") {
      const k = (above[b.door] = (above[b.door] ?? 0) + 1);
      return { ...b, x, y: 220 - 60 * k };
    }
    return { ...b, x, y: 285 };
  });
}

function drawFloor(ctx, bins, shade) {
  const s = 26;
  for (const b of bins) {
    if (b.tag !== "corridor") {
      const door = bins[b.door];
      ctx.strokeStyle = "#bbb";
      ctx.beginPath();
      ctx.moveTo(b.x, b.y);
      ctx.lineTo(door.x, door.y);
      ctx.stroke();
    }
  }
  for (const b of bins) {
    ctx.fillStyle = TAG_COLORS[b.tag] ?? "#eee";
    ctx.fillRect(b.x - s, b.y - s / 2, 2 * s, s);
    if (shade) {
      ctx.fillStyle = `rgba(200, 30, 30, ${Math.min(1, Math.sqrt(shade[b.id]))})`;
      ctx.fillRect(b.x - s, b.y - s / 2, 2 * s, s);
    }
    ctx.fillStyle = "#333";
    ctx.fillText(String(b.id), b.x - 6, b.y + 4);
  }
}

// ---------- tracking ----------

function runTrack() {
  report($("t-out"), () => {
    const v = call(track_agent, Number($("t-seed").value), Number($("t-pd").value), Number($("t-fp").value));
    $("t-out").textContent =
      `${v.events} events about agent 0; per-tick argmax correct ${(100 * v.argmax_accuracy).toFixed(1)}%, ` +
      `whole-path decode correct ${(100 * v.viterbi_accuracy).toFixed(1)}%`;
    const c = $("t-canvas");
    const ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    const n = v.truth.length;
    const bins = v.floor.length;
    const x = (t) => 40 + (t * (c.width - 50)) / n;
    const y = (l) => c.height - 20 - (l * (c.height - 40)) / (bins - 1);
    ctx.fillStyle = "#555";
    ctx.fillText("bin", 5, 15);
    for (const l of [0, 10, 40, 46]) ctx.fillText(String(l), 10, y(l) + 4);
    ctx.fillText("tick", c.width - 30, c.height - 5);
    const line = (path, color, width, dy) => {
      ctx.strokeStyle = color;
      ctx.lineWidth = width;
      ctx.beginPath();
      path.forEach((l, t) => (t ? ctx.lineTo(x(t), y(l) + dy) : ctx.moveTo(x(t), y(l) + dy)));
      ctx.stroke();
    };
    line(v.truth, "#bbb", 5, 0);
    line(v.argmax, "#ff7f0e", 1, -2);
    line(v.viterbi, "#1f77b4", 1.5, 2);
    ctx.lineWidth = 1;
  });
}

// ---------- surprise ----------

let week = null;

function drawWeekFloor(day) {
  const c = $("s-floor");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const shade = day === null ? week.baseline : week.days[day];
  ctx.fillStyle = "#333";
  ctx.fillText(day === null ? "week baseline occupancy" : `day ${day} occupancy`, 10, 15);
  drawFloor(ctx, layout(week.floor, c.width), shade);
}

function drawBars(selected) {
  const c = $("s-bars");
  const ctx = c.getContext("2d");
  ctx.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...week.bits, 1e-9);
  const bw = c.width / week.bits.length;
  week.bits.forEach((b, d) => {
    const h = ((c.height - 40) * b) / max;
    ctx.fillStyle = d === week.unusual_day ? "#d62728" : "#1f77b4";
    if (d === selected) ctx.fillStyle = "#ff7f0e";
    ctx.fillRect(d * bw + 20, c.height - 20 - h, bw - 40, h);
    ctx.fillStyle = "#333";
    ctx.fillText(`day ${d}: ${b.toFixed(3)} bits`, d * bw + 20, c.height - 5);
  });
}

function runSurprise() {
  report($("s-out"), () => {
    week = call(surprise_week, Number($("s-seed").value));
    const top = week.patterns.map((p) => `${p.sequence.join("→")} (${p.support})`).join(", ");
    $("s-out").textContent = `Frequent patterns: ${top || "none"}`;
    drawBars(null);
    drawWeekFloor(null);
  });
}

$("s-bars").addEventListener("click", (e) => {
  if (!week) return;
  const c = $("s-bars");
  const d = Math.floor(((e.offsetX * c.width) / c.clientWidth) / (c.width / week.bits.length));
  drawBars(d);
  drawWeekFloor(d);
});

// ---------- contacts ----------

function runContacts() {
  report($("c-out"), () => {
    const v = call(contact_network, Number($("c-seed").value), Number($("c-min").value));
    const total = v.edges.reduce((s, e) => s + e.ticks, 0);
    $("c-out").textContent = `${v.edges.length} directed edges, ${total} shared ticks; hubs ${v.hubs.join(", ")}`;
    const c = $("c-canvas");
    const ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    const n = v.nodes.length;
    const pos = {};
    v.nodes.forEach((node, i) => {
      const a = (2 * Math.PI * i) / n - Math.PI / 2;
      pos[node.agent] = { x: c.width / 2 + 180 * Math.cos(a), y: c.height / 2 + 180 * Math.sin(a) };
    });
    const maxW = Math.max(1, ...v.edges.map((e) => e.ticks));
    for (const e of v.edges) {
      const p = pos[e.from];
      const q = pos[e.to];
      // offset each direction sideways so both arrows of a pair stay visible
      const dx = q.x - p.x;
      const dy = q.y - p.y;
      const len = Math.hypot(dx, dy);
      const ox = (-dy / len) * 4;
      const oy = (dx / len) * 4;
      const ex = q.x - (dx / len) * 18 + ox;
      const ey = q.y - (dy / len) * 18 + oy;
      ctx.strokeStyle = "rgba(60, 60, 60, 0.55)";
      ctx.lineWidth = 0.5 + 5 * Math.log1p(e.ticks) / Math.log1p(maxW);
      ctx.beginPath();
      ctx.moveTo(p.x + ox, p.y + oy);
      ctx.lineTo(ex, ey);
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(ex, ey, 2.5, 0, 2 * Math.PI);
      ctx.fill();
    }
    ctx.lineWidth = 1;
    for (const node of v.nodes) {
      const p = pos[node.agent];
      ctx.fillStyle = DEPT_COLORS[node.department] ?? DEPT_COLORS.other;
      ctx.beginPath();
      ctx.arc(p.x, p.y, 15, 0, 2 * Math.PI);
      ctx.fill();
      if (v.hubs.includes(node.agent)) {
        ctx.strokeStyle = "#000";
        ctx.lineWidth = 3;
        ctx.stroke();
        ctx.lineWidth = 1;
      }
      ctx.fillStyle = "#fff";
      ctx.fillText(String(node.agent), p.x - 4, p.y + 4);
    }
    let ly = 20;
    for (const [dept, color] of Object.entries(DEPT_COLORS)) {
      if (dept === "other") continue;
      ctx.fillStyle = color;
      ctx.fillRect(10, ly - 9, 12, 12);
      ctx.fillStyle = "#333";
      ctx.fillText(dept, 28, ly + 1);
      ly += 18;
    }
  });
}

const mirror = (input, out) => {
  const f = () => ($(out).textContent = $(input).value);
  $(input).addEventListener("input", f);
  f();
};

await init();
mirror("t-pd", "t-pd-v");
mirror("t-fp", "t-fp-v");
mirror("c-min", "c-min-v");
$("t-run").addEventListener("click", runTrack);
$("s-run").addEventListener("click", runSurprise);
$("c-run").addEventListener("click", runContacts);
$("c-min").addEventListener("change", runContacts);
runTrack();
runSurprise();
runContacts();
