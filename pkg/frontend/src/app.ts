/** Page wiring: one main canvas (scenario + demos + generated trajectory)
 * and one attention panel, plus controls for scenario sampling, training,
 * and query policy. */

import { ApiClient } from "./api.js";
import { DemoPad } from "./demos.js";
import { QueryExplorer } from "./explore.js";
import {
  drawAttentionPanel,
  drawFrameHandles,
  drawGenerated,
  drawScenario,
  drawStroke,
} from "./render.js";
import { ScenarioEditor } from "./scene.js";
import { StrokeRecorder } from "./stroke.js";
import { Viewport } from "./transform.js";
import type { Point, ScenarioRecord } from "./types.js";

type Tool = "draw" | "edit-scene" | "drag-frame";

export function mount(root: HTMLElement, baseUrl = ""): void {
  root.innerHTML = `
    <div class="toolbar">
      <select id="kind">
        <option value="docker">docker</option>
        <option value="docker-obstacle">docker-obstacle</option>
        <option value="docker-obstacle-tunnel">docker-obstacle-tunnel</option>
      </select>
      <input id="seed" type="number" value="0" style="width:4em">
      <button id="new-scenario">New scenario</button>
      <select id="tool">
        <option value="draw">draw demo</option>
        <option value="edit-scene">edit scenario</option>
        <option value="drag-frame">drag query frames</option>
      </select>
      <button id="undo">Undo demo</button>
      <select id="method">
        <option value="salat">salat</option>
        <option value="salit">salit</option>
        <option value="tpgmm">tpgmm</option>
        <option value="alpha-tpgmm">alpha-tpgmm</option>
      </select>
      <button id="train">Train</button>
      <select id="policy">
        <option value="mean">mean</option>
        <option value="sample">sample</option>
      </select>
      <input id="gen-seed" type="number" value="0" style="width:4em">
      <span id="status"></span>
    </div>
    <canvas id="world" width="520" height="520"></canvas>
    <canvas id="attention" width="520" height="120"></canvas>
  `;
  const $ = <T extends HTMLElement>(id: string) =>
    root.querySelector(`#${id}`) as T;
  const canvas = $<HTMLCanvasElement>("world");
  const attnCanvas = $<HTMLCanvasElement>("attention");
  const status = $<HTMLSpanElement>("status");
  const view = new Viewport(canvas.width, canvas.height);
  const api = new ApiClient(baseUrl);
  const ctx = canvas.getContext("2d")!;
  const attnCtx = attnCanvas.getContext("2d")!;

  let scenario: ScenarioRecord | null = null;
  let editor: ScenarioEditor | null = null;
  let pad: DemoPad | null = null;
  let explorer: QueryExplorer | null = null;
  const recorder = new StrokeRecorder();

  const say = (message: string) => {
    status.textContent = message;
  };

  const redraw = () => {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (editor) drawScenario(ctx, view, editor.scenario);
    if (pad) for (const demo of pad.demos) drawStroke(ctx, view, demo, true);
    if (recorder.active) drawStroke(ctx, view, recorder.current);
    if (explorer) {
      drawFrameHandles(ctx, view, explorer.frames.map((f) => f.translation));
      if (explorer.result) {
        drawGenerated(ctx, view, explorer.result.trajectory, editor?.scenario ?? null);
        drawAttentionPanel(
          attnCtx,
          explorer.result.attention,
          attnCanvas.width,
          attnCanvas.height,
        );
      }
    }
  };

  const loadScenario = (record: ScenarioRecord) => {
    scenario = record;
    editor = new ScenarioEditor(record.scenario);
    explorer = null;
    pad = new DemoPad(api, record.id, {
      onDemo: () => {
        say(`${pad!.demos.length} demonstrations`);
        redraw();
      },
      onMessage: say,
    });
    for (const demo of record.demos) pad.demos.push(demo);
    say(`scenario ${record.id} (${record.scenario.kind})`);
    redraw();
  };

  $<HTMLButtonElement>("new-scenario").onclick = () => {
    api
      .createScenario({
        kind: $<HTMLSelectElement>("kind").value,
        seed: Number($<HTMLInputElement>("seed").value),
      })
      .then(loadScenario)
      .catch((err) => say(String(err)));
  };

  $<HTMLButtonElement>("undo").onclick = () => {
    pad?.undo().then(redraw);
  };

  $<HTMLButtonElement>("train").onclick = () => {
    if (!scenario || !editor) return say("sample a scenario first");
    const method = $<HTMLSelectElement>("method").value;
    const kind = method === "salat" || method === "salit" ? "train-attention" : "train-baseline";
    // Persist any pending geometry edits as a fresh scenario before training.
    api
      .createScenario({ scenario: editor.scenario, horizon: scenario.horizon })
      .then((record) => {
        scenario = { ...record, demos: scenario!.demos };
        return api.submitJob({ kind, scenario_id: record.id, method });
      })
      .then((job) => {
        say(`job ${job.id} queued`);
        return api.pollJob(job.id, {
          onUpdate: (j) => say(`job ${j.id}: ${j.status}`),
        });
      })
      .then((job) => {
        const modelId = job.result as string;
        say(`model ${modelId} ready`);
        explorer = new QueryExplorer(api, modelId, queryFramesFromScene(), {
          onResult: redraw,
          onError: say,
        });
        return explorer.requestGenerate();
      })
      .catch((err) => say(String(err)));
  };

  const queryFramesFromScene = () => {
    const s = editor!.scenario;
    const frame = (angle: number, translation: number[]) => ({
      rotation: [
        [Math.cos(angle), -Math.sin(angle)],
        [Math.sin(angle), Math.cos(angle)],
      ],
      translation,
    });
    const frames = [frame(s.start.angle, s.start.mouth)];
    if (s.obstacle) frames.push(frame(0, s.obstacle.center));
    if (s.tunnel) frames.push(frame(s.tunnel.angle, s.tunnel.entrance));
    else if (s.goal) frames.push(frame(s.goal.angle, s.goal.mouth));
    return frames;
  };

  $<HTMLSelectElement>("policy").onchange = () => {
    if (!explorer) return;
    explorer.policy = $<HTMLSelectElement>("policy").value;
    explorer.requestGenerate();
  };
  $<HTMLInputElement>("gen-seed").onchange = () => {
    if (!explorer) return;
    explorer.seed = Number($<HTMLInputElement>("gen-seed").value);
    explorer.requestGenerate();
  };

  const toWorld = (ev: PointerEvent): Point => {
    const rect = canvas.getBoundingClientRect();
    return view.screenToWorld([ev.clientX - rect.left, ev.clientY - rect.top]);
  };
  const tool = (): Tool => $<HTMLSelectElement>("tool").value as Tool;

  canvas.onpointerdown = (ev) => {
    const world = toWorld(ev);
    canvas.setPointerCapture(ev.pointerId);
    if (tool() === "draw") recorder.begin(world);
    else if (tool() === "edit-scene") editor?.beginDrag(world);
    else if (tool() === "drag-frame" && explorer) {
      let best = -1;
      let bestDist = 0.06;
      explorer.frames.forEach((f, k) => {
        const d = Math.hypot(world[0] - f.translation[0], world[1] - f.translation[1]);
        if (d < bestDist) {
          best = k;
          bestDist = d;
        }
      });
      if (best >= 0) explorer.beginDrag(best);
    }
  };
  canvas.onpointermove = (ev) => {
    if (ev.buttons === 0) return;
    const world = toWorld(ev);
    if (tool() === "draw") recorder.extend(world);
    else if (tool() === "edit-scene") editor?.dragTo(world);
    else explorer?.dragTo(world);
    redraw();
  };
  canvas.onpointerup = () => {
    if (tool() === "draw" && recorder.active) {
      pad?.submit(recorder.end());
    } else if (tool() === "edit-scene") {
      editor?.endDrag();
    } else {
      explorer?.endDrag();
    }
    redraw();
  };
}
