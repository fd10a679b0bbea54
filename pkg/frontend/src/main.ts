// Application wiring: queries the DOM, opens the session and socket,
// and routes events through the pure modules. All simulation state
// shown here is a server echo; the client computes nothing physical.

import { api, ApiError } from "./api.js";
import {
  initPanel, PanelState, pickStyle, rolloutBody, setMetric, setRange,
  setUnsatisfiable,
} from "./control.js";
import { canvasSize } from "./geometry.js";
import { addRollout, buildOverlay, Counts, emptyCounts } from "./histogram.js";
import { actionForDrag, actionForKeys, isMovementKey } from "./input.js";
import { overlayMessage } from "./reconnect.js";
import { drawScene, Scene } from "./render.js";
import { StepSocket } from "./socket.js";
import type {
  DatasetSummary, MazePayload, SessionSnapshot, ServerInfo, Vec2,
} from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class DemoStudio {
  private maze!: MazePayload;
  private info!: ServerInfo;
  private summary: DatasetSummary | null = null;
  private sid = "";
  private snap: SessionSnapshot | null = null;
  private socket: StepSocket | null = null;
  private awaitingEcho = false;

  private held = new Set<string>();
  private dragStart: Vec2 | null = null;
  private dragNow: Vec2 | null = null;

  private panel: PanelState | null = null;
  private counts: Counts = emptyCounts();
  private ghostTrail: Vec2[] = [];
  private ghost: Vec2 | null = null;
  private animating = false;

  private readonly canvas = el<HTMLCanvasElement>("maze");
  private readonly ctx = this.canvas.getContext("2d")!;

  async boot(): Promise<void> {
    this.info = await api.info();
    this.maze = await api.maze();
    const [w, h] = canvasSize(this.maze.width, this.maze.height);
    this.canvas.width = w;
    this.canvas.height = h;
    if (this.info.dataset) {
      this.summary = await api.datasetSummary();
    }
    this.buildPanel();
    this.renderHistogram();
    await this.openSession();
    this.bindInput();
    requestAnimationFrame((t) => this.tick(t));
  }

  private async openSession(): Promise<void> {
    const created = await api.createSession();
    this.sid = created.id;
    this.snap = created.state;
    this.socket?.close();
    this.socket = new StepSocket(this.sid, {
      onFrame: (f) => {
        this.awaitingEcho = false;
        if (!f.error) {
          this.snap = { ...this.snap!, s: f.s, visited: f.visited,
                        done: f.done, steps: this.snap!.steps + 1,
                        recorded: this.snap!.recorded + 1 };
        }
        this.renderStatus();
      },
      onConnState: async (s) => {
        const msg = overlayMessage(s);
        const overlay = el("conn-overlay");
        overlay.textContent = msg ?? "";
        overlay.classList.toggle("visible", msg !== null);
        if (s.phase === "connected" && this.sid) {
          // resume from the server's state after a drop
          this.snap = await api.sessionState(this.sid);
          this.awaitingEcho = false;
          this.renderStatus();
        }
      },
    });
    this.socket.connect();
    this.renderStatus();
  }

  private bindInput(): void {
    window.addEventListener("keydown", (e) => {
      if (isMovementKey(e.code)) {
        e.preventDefault();
        this.held.add(e.code);
      }
    });
    window.addEventListener("keyup", (e) => this.held.delete(e.code));
    window.addEventListener("blur", () => this.held.clear());

    this.canvas.addEventListener("pointerdown", (e) => {
      this.canvas.setPointerCapture(e.pointerId);
      this.dragStart = [e.offsetX, e.offsetY];
      this.dragNow = this.dragStart;
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (this.dragStart) this.dragNow = [e.offsetX, e.offsetY];
    });
    const endDrag = () => {
      this.dragStart = null;
      this.dragNow = null;
    };
    this.canvas.addEventListener("pointerup", endDrag);
    this.canvas.addEventListener("pointercancel", endDrag);

    el<HTMLButtonElement>("save").addEventListener("click", () => this.save());
    el<HTMLButtonElement>("reset").addEventListener("click", () => this.reset());
  }

  /** One animation tick: at most one step frame in flight at a time. */
  private tick(_t: number): void {
    const action = this.currentAction();
    if (action && this.socket?.ready && !this.awaitingEcho
        && this.snap && !this.snap.done) {
      if (this.socket.send(action)) this.awaitingEcho = true;
    }
    this.draw();
    requestAnimationFrame((t) => this.tick(t));
  }

  private currentAction(): Vec2 | null {
    if (this.dragStart && this.dragNow) {
      const cell = this.canvas.width / this.maze.width;
      return actionForDrag(this.dragNow[0] - this.dragStart[0],
                           this.dragNow[1] - this.dragStart[1], cell);
    }
    return actionForKeys(this.held);
  }

  private draw(): void {
    const scene: Scene = {
      maze: this.maze,
      agent: this.snap ? this.snap.s : null,
      visited: this.snap?.visited ?? [],
      done: this.snap?.done ?? false,
      ghostTrail: this.ghostTrail,
      ghost: this.ghost,
    };
    drawScene(this.ctx, scene);
  }

  private renderStatus(): void {
    const s = this.snap;
    el("status").textContent = s
      ? `steps ${s.steps} | recorded ${s.recorded} | doors [${s.visited.join(" ")}]`
        + (s.done ? " | episode done" : "")
      : "no session";
    el("rec-badge").classList.toggle("visible",
                                     !!s && s.recorded > 0 && !s.done);
    el("done-badge").classList.toggle("visible", !!s && s.done);
  }

  private async save(): Promise<void> {
    const dialog = el("save-dialog");
    try {
      const out = await api.save(this.sid);
      dialog.textContent = `saved behavior "${out.behavior}" `
        + `(length ${out.length}, ${out.success ? "success" : "no goal"})`
        + (out.dataset_index !== undefined
           ? `; dataset entry ${out.dataset_index}` : "");
    } catch (e) {
      dialog.textContent = e instanceof ApiError
        ? `save failed: ${e.message}` : String(e);
    }
    dialog.classList.add("visible");
  }

  private async reset(): Promise<void> {
    this.snap = await api.resetSession(this.sid);
    el("save-dialog").classList.remove("visible");
    this.renderStatus();
  }

  private buildPanel(): void {
    this.panel = initPanel(this.info, this.summary?.length_min ?? 0,
                           this.summary?.length_max ?? 300);
    const root = el("panel");
    const notice = el("panel-notice");
    if (!this.panel.enabled) {
      root.classList.add("disabled");
      notice.textContent = this.panel.notice;
      for (const b of root.querySelectorAll("button, input, select")) {
        (b as HTMLButtonElement).disabled = true;
      }
      return;
    }
    notice.textContent = "";

    const metricSel = el<HTMLSelectElement>("metric");
    metricSel.innerHTML = "";
    for (const m of this.panel.metrics) {
      const opt = document.createElement("option");
      opt.value = m;
      opt.textContent = m;
      metricSel.appendChild(opt);
    }
    metricSel.value = this.panel.metric;
    metricSel.addEventListener("change", () => {
      this.panel = setMetric(this.panel!, metricSel.value);
      this.syncPanel();
    });

    const minIn = el<HTMLInputElement>("range-min");
    const maxIn = el<HTMLInputElement>("range-max");
    const lo = this.summary?.length_min ?? 0;
    const hi = this.summary?.length_max ?? 300;
    for (const input of [minIn, maxIn]) {
      input.min = String(lo);
      input.max = String(hi);
    }
    minIn.value = String(this.panel.min);
    maxIn.value = String(this.panel.max);
    minIn.addEventListener("input", () => {
      this.panel = setRange(this.panel!, "min", Number(minIn.value));
      this.syncPanel();
    });
    maxIn.addEventListener("input", () => {
      this.panel = setRange(this.panel!, "max", Number(maxIn.value));
      this.syncPanel();
    });

    const styleSel = el<HTMLSelectElement>("style-pick");
    styleSel.innerHTML = "<option value=''>range</option>";
    for (let i = 0; i < (this.panel.nStyles ?? 0); i++) {
      const opt = document.createElement("option");
      opt.value = String(i);
      opt.textContent = `style ${i}`;
      styleSel.appendChild(opt);
    }
    styleSel.addEventListener("change", () => {
      const v = styleSel.value === "" ? null : Number(styleSel.value);
      this.panel = pickStyle(this.panel!, v);
      this.syncPanel();
    });

    el<HTMLButtonElement>("generate").addEventListener(
      "click", () => this.rollout(rolloutBody(this.panel!)));
    el<HTMLButtonElement>("generate-free").addEventListener(
      "click", () => this.rollout({}));
    this.syncPanel();
  }

  private syncPanel(): void {
    if (!this.panel) return;
    el("range-label").textContent =
      `${this.panel.metric} in [${this.panel.min}, ${this.panel.max}]`;
    el<HTMLInputElement>("range-min").value = String(this.panel.min);
    el<HTMLInputElement>("range-max").value = String(this.panel.max);
    const err = el("panel-error");
    err.textContent = this.panel.error ?? "";
    err.classList.toggle("visible", this.panel.error !== null);
    const styleSel = el<HTMLSelectElement>("style-pick");
    styleSel.value = this.panel.styleIndex === null
      ? "" : String(this.panel.styleIndex);
  }

  private async rollout(body: unknown): Promise<void> {
    if (this.animating || !this.panel?.enabled) return;
    this.animating = true;
    el<HTMLButtonElement>("generate").disabled = true;
    el<HTMLButtonElement>("generate-free").disabled = true;
    try {
      const res = await api.rollout(body);
      await this.animateTrajectory(res.trajectory.states);
      addRollout(this.counts, res.behavior);
      this.renderHistogram();
      el("rollout-caption").textContent =
        `behavior "${res.behavior}", length ${res.trajectory.actions.length}, `
        + `style ${res.style_index} of ${res.style_support.length} eligible`;
    } catch (e) {
      if (e instanceof ApiError && e.status === 422) {
        this.panel = setUnsatisfiable(this.panel, e.message);
        this.syncPanel();
      } else {
        el("rollout-caption").textContent = `rollout failed: ${String(e)}`;
      }
    } finally {
      this.animating = false;
      el<HTMLButtonElement>("generate").disabled = false;
      el<HTMLButtonElement>("generate-free").disabled = false;
    }
  }

  private animateTrajectory(states: Vec2[]): Promise<void> {
    return new Promise((resolve) => {
      let i = 0;
      const perFrame = 4;
      const step = () => {
        i = Math.min(i + perFrame, states.length - 1);
        this.ghostTrail = states.slice(0, i + 1);
        this.ghost = states[i];
        if (i < states.length - 1) {
          requestAnimationFrame(step);
        } else {
          resolve();
        }
      };
      requestAnimationFrame(step);
    });
  }

  private renderHistogram(): void {
    const host = el("histogram");
    host.innerHTML = "";
    if (!this.summary) {
      host.textContent = "no dataset loaded";
      return;
    }
    const overlay = buildOverlay(this.summary.histogram, this.counts);
    el("hist-caption").textContent =
      `training vs generated (${overlay.total} rollouts)`;
    for (const row of overlay.rows) {
      const div = document.createElement("div");
      div.className = "hist-row";
      const name = document.createElement("span");
      name.className = "hist-label";
      name.textContent = row.label;
      const bars = document.createElement("div");
      bars.className = "hist-bars";
      for (const [cls, mass] of [["train", row.train],
                                 ["gen", row.gen]] as const) {
        const bar = document.createElement("div");
        bar.className = `bar ${cls}`;
        bar.style.width = `${Math.round(mass * 100)}%`;
        bar.title = `${cls} ${mass.toFixed(3)}`;
        bars.appendChild(bar);
      }
      div.append(name, bars);
      host.appendChild(div);
    }
  }
}

new DemoStudio().boot().catch((e) => {
  document.body.insertAdjacentHTML(
    "beforeend", `<pre class="boot-error">${String(e)}</pre>`);
});
