// Demo page driver. Expects the wasm-pack output in ./pkg (see the README:
//   wasm-pack build crates/flyby-wasm --target web --out-dir www/pkg
// then serve this directory).

import init, { track_scene, project_point2, body_outline2, shapiro_demo } from "./pkg/flyby_wasm.js";

const status = document.getElementById("status");

function plotAxes(ctx, w, h, pad) {
  ctx.strokeStyle = "#cbd5e1";
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

function makeMapper(xs, ys, w, h, pad) {
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const ymin = Math.min(...ys), ymax = Math.max(...ys);
  const sx = (w - 2 * pad) / (xmax - xmin || 1);
  const sy = (h - 2 * pad) / (ymax - ymin || 1);
  return {
    x: (v) => pad + (v - xmin) * sx,
    y: (v) => h - pad - (v - ymin) * sy,
    xmin, xmax, ymin, ymax,
  };
}

function polyline(ctx, pts, map, style, width = 1.6) {
  ctx.strokeStyle = style;
  ctx.lineWidth = width;
  ctx.beginPath();
  pts.forEach(([x, y], i) => {
    if (i === 0) ctx.moveTo(map.x(x), map.y(y));
    else ctx.lineTo(map.x(x), map.y(y));
  });
  ctx.stroke();
}

// --- section 1: tracking -------------------------------------------------

const trkBody = document.getElementById("trk-body");
const trkKappa = document.getElementById("trk-kappa");
const trkTend = document.getElementById("trk-tend");

function trackConfig() {
  const kappa = parseFloat(trkKappa.value);
  const tEnd = parseFloat(trkTend.value);
  if (trkBody.value === "cylinder") {
    return {
      body: { kind: "cylinder", params: { kappa } },
      trajectory: { kind: "line", start: [0, 1 / kappa + 1, 0], velocity: [1, 0, 1] },
      initial: "auto",
      integrator: { oracle_grid_density: 360 },
      time: { start: -tEnd, end: tEnd, samples: 241 },
    };
  }
  return {
    body: { kind: "ellipsoid_of_revolution", params: { kappa } },
    trajectory: { kind: "line", start: [2, 0, 0], velocity: [0, 1, 1] },
    initial: "auto",
    integrator: { oracle_grid_density: 360 },
    time: { start: 0, end: tEnd, samples: 241 },
  };
}

function drawTrack() {
  document.getElementById("trk-kappa-val").textContent = trkKappa.value;
  document.getElementById("trk-tend-val").textContent = trkTend.value;
  let data;
  try {
    data = JSON.parse(track_scene(JSON.stringify(trackConfig())));
  } catch (e) {
    document.getElementById("trk-readout").textContent = "run failed: " + e;
    return;
  }
  const rt = document.getElementById("trk-rt");
  const ctx = rt.getContext("2d");
  ctx.clearRect(0, 0, rt.width, rt.height);
  plotAxes(ctx, rt.width, rt.height, 30);
  const map = makeMapper(data.t, data.r, rt.width, rt.height, 30);
  polyline(ctx, data.t.map((t, i) => [t, data.r[i]]), map, "#2563eb");
  ctx.fillStyle = "#334155";
  ctx.font = "12px system-ui";
  ctx.fillText(`r(t): ${map.ymin.toFixed(3)} … ${map.ymax.toFixed(3)}`, 36, 20);

  const uv = document.getElementById("trk-uv");
  const c2 = uv.getContext("2d");
  c2.clearRect(0, 0, uv.width, uv.height);
  plotAxes(c2, uv.width, uv.height, 30);
  const us = data.u, vs = data.v ?? data.u.map(() => 0);
  const map2 = makeMapper(vs, us, uv.width, uv.height, 30);
  polyline(c2, vs.map((v, i) => [v, us[i]]), map2, "#059669");
  c2.fillStyle = "#334155";
  c2.fillText("projection path (v horizontal, u vertical)", 36, 20);

  const meta = data.meta;
  document.getElementById("trk-readout").textContent =
    `accepted steps ${meta.steps_accepted}, rejected ${meta.steps_rejected}, ` +
    `rhs evaluations ${meta.rhs_evals}\n` +
    `max reconstruction residual ${meta.max_residual.toExponential(2)}, ` +
    `re-initializations ${meta.reinit_events.length}`;
}

// --- section 2: projection playground ------------------------------------

const prjBody = document.getElementById("prj-body");
const prjCanvas = document.getElementById("prj-canvas");
let prjOutline = [];

function projBodySpec() {
  switch (prjBody.value) {
    case "disk": return { kind: "disk" };
    case "ellipse": return { kind: "ellipse", params: { a: 2, b: 1 } };
    default: return { kind: "shapiro", params: { lambda: 0.5, c: Math.PI / 2, arcs: 12 } };
  }
}

const PRJ_SCALE = 80, PRJ_CX = 250, PRJ_CY = 200;
const toScreen = ([x, y]) => [PRJ_CX + x * PRJ_SCALE, PRJ_CY - y * PRJ_SCALE];
const toWorld = (sx, sy) => [(sx - PRJ_CX) / PRJ_SCALE, (PRJ_CY - sy) / PRJ_SCALE];

function drawProjection(world) {
  const ctx = prjCanvas.getContext("2d");
  ctx.clearRect(0, 0, prjCanvas.width, prjCanvas.height);
  ctx.strokeStyle = "#1f2937";
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  prjOutline.forEach((p, i) => {
    const [sx, sy] = toScreen(p);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.stroke();

  if (!world) return;
  let result;
  try {
    result = JSON.parse(project_point2(JSON.stringify(projBodySpec()), world[0], world[1]));
  } catch (e) {
    document.getElementById("prj-readout").textContent = String(e);
    return;
  }
  const [px, py] = toScreen(world);
  const [nx, ny] = toScreen(result.nearest);
  ctx.strokeStyle = "#dc2626";
  ctx.lineWidth = 1.2;
  ctx.beginPath();
  ctx.moveTo(px, py);
  ctx.lineTo(nx, ny);
  ctx.stroke();
  ctx.fillStyle = "#dc2626";
  ctx.beginPath(); ctx.arc(px, py, 4, 0, 7); ctx.fill();
  ctx.fillStyle = "#2563eb";
  ctx.beginPath(); ctx.arc(nx, ny, 4, 0, 7); ctx.fill();
  document.getElementById("prj-readout").textContent =
    `observer  (${world[0].toFixed(3)}, ${world[1].toFixed(3)})\n` +
    `nearest   (${result.nearest[0].toFixed(6)}, ${result.nearest[1].toFixed(6)})\n` +
    `distance  ${result.distance.toFixed(6)}\n` +
    `direction (${result.theta[0].toFixed(4)}, ${result.theta[1].toFixed(4)})`;
}

function reloadOutline() {
  prjOutline = JSON.parse(body_outline2(JSON.stringify(projBodySpec()), 1200));
  drawProjection([2, 0.8]);
}

prjCanvas.addEventListener("mousemove", (ev) => {
  const rect = prjCanvas.getBoundingClientRect();
  const world = toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  // Only project from outside; skip interior points quietly.
  try { drawProjection(world); } catch { /* interior */ }
});

// --- section 3: counterexample -------------------------------------------

const shpLambda = document.getElementById("shp-lambda");
const shpArcs = document.getElementById("shp-arcs");

function drawShapiro() {
  const lambda = parseFloat(shpLambda.value);
  const arcs = parseInt(shpArcs.value, 10);
  document.getElementById("shp-lambda-val").textContent = lambda.toFixed(2);
  document.getElementById("shp-arcs-val").textContent = arcs;
  let data;
  try {
    data = JSON.parse(shapiro_demo(lambda, Math.PI / 2, arcs, 1.2));
  } catch (e) {
    document.getElementById("shp-readout").textContent = "experiment failed: " + e;
    return;
  }

  const bc = document.getElementById("shp-boundary");
  const ctx = bc.getContext("2d");
  ctx.clearRect(0, 0, bc.width, bc.height);
  const map = makeMapper(data.boundary.map(p => p[0]), data.boundary.map(p => p[1]), bc.width, bc.height, 16);
  polyline(ctx, data.boundary, map, "#1f2937", 1.4);
  ctx.fillStyle = "#dc2626";
  data.anchors.forEach(([x, y]) => {
    ctx.beginPath(); ctx.arc(map.x(x), map.y(y), 2.2, 0, 7); ctx.fill();
  });
  ctx.fillStyle = "#334155";
  ctx.font = "12px system-ui";
  ctx.fillText("boundary and corner anchors", 22, 16);

  // Projection speed staircase over log t.
  const sc = document.getElementById("shp-speed");
  const c2 = sc.getContext("2d");
  c2.clearRect(0, 0, sc.width, sc.height);
  plotAxes(c2, sc.width, sc.height, 34);
  const recs = data.records.filter(r => r.kind !== "circle");
  const logt = recs.map(r => Math.log10(r.t));
  const m = makeMapper(logt, [0, 1.1], sc.width, sc.height, 34);
  recs.forEach((r, i) => {
    c2.fillStyle = r.kind === "arc" ? "#d97706" : "#2563eb";
    c2.fillRect(m.x(logt[i]), m.y(r.speed), 2, 2);
  });
  // Quotient subsequences.
  c2.fillStyle = "#059669";
  data.sweep_points.forEach(p => {
    c2.fillRect(m.x(Math.log10(p.t_n)) - 1, m.y(p.q_at_t) - 1, 4, 4);
  });
  c2.fillStyle = "#7c3aed";
  data.sweep_points.forEach(p => {
    c2.fillRect(m.x(Math.log10(p.s_n)) - 1, m.y(p.q_at_s) - 1, 4, 4);
  });
  c2.fillStyle = "#334155";
  c2.fillText("|Π'| per piece (amber arcs, blue segments); quotient tails (green/violet) — log t", 40, 20);

  document.getElementById("shp-readout").textContent =
    `arc radius limit 2λ/(1+λ) = ${data.radius_limit.toFixed(6)}   ` +
    `arc speed limit 2λ/(1+3λ) = ${data.arc_speed_limit.toFixed(6)}\n` +
    `difference quotient tails: along t_n ${data.tail_t_mean.toFixed(6)}, ` +
    `along s_n ${data.tail_s_mean.toFixed(6)}  (gap ${data.gap.toFixed(6)})\n` +
    `one-sided derivative at t = 0 ${data.certified_divergent ? "does NOT exist (certified)" : "status unclear"}`;
}

// --- boot -----------------------------------------------------------------

init().then(() => {
  status.textContent = "";
  drawTrack();
  reloadOutline();
  drawShapiro();
  for (const el of [trkBody, trkKappa, trkTend]) el.addEventListener("input", drawTrack);
  prjBody.addEventListener("input", reloadOutline);
  for (const el of [shpLambda, shpArcs]) el.addEventListener("input", drawShapiro);
}).catch((e) => {
  status.textContent = "failed to load wasm module: " + e + " — build it with wasm-pack first (see README).";
});
