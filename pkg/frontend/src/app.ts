/**
 * DOM wiring for the audit console: a configuration form, then a live view
 * with the wealth chart, decision banner, confidence bounds, draw/observe
 * controls and a what-if preview. All statistics come from the service; the
 * page is rebuilt from GET /v1/sessions/{id} after every commit, so a
 * browser refresh reproduces the identical view.
 */

import { ApiError, SessionApi, type SessionView, type Summary } from "./api.js";
import { renderChart } from "./chart.js";
import { AUDIT_PRESET, validateForm, validateObservation, type FormState } from "./model.js";

interface UiState {
  sessionId: string | null;
  ghost: { k: number; wealth: number } | null;
  pendingItem: { id: string; bookValue: number } | null;
  submitting: boolean;
}

export class AuditConsole {
  private readonly state: UiState = {
    sessionId: null,
    ghost: null,
    pendingItem: null,
    submitting: false,
  };

  constructor(
    private readonly api: SessionApi,
    private readonly root: HTMLElement,
  ) {}

  start(): void {
    this.renderConfigForm();
  }

  // ----------------------------------------------------------- config form

  private renderConfigForm(): void {
    const f = AUDIT_PRESET;
    this.root.innerHTML = `
      <form id="config" class="config-form">
        <h1>Audit session</h1>
        <label>Null direction
          <select name="direction">
            <option value="lower" selected>mean &#8805; &#956; (taint test)</option>
            <option value="upper">mean &#8804; &#956;</option>
            <option value="point">mean = &#956;</option>
          </select>
        </label>
        <label>&#956; (tolerable rate) <input name="mu" value="${f.mu}"></label>
        <label>&#945; (level) <input name="alpha" value="${f.alpha}"></label>
        <label>&#964; (support bound) <input name="tau" value="${f.tau}"></label>
        <label>Bet policy
          <select name="policyKind">
            <option value="grid" selected>mixture over an interval</option>
            <option value="fixed">fixed bet size</option>
          </select>
        </label>
        <label>c (fixed) <input name="c" value="${f.c}"></label>
        <label>grid from <input name="gridLo" value="${f.gridLo}">
               to <input name="gridHi" value="${f.gridHi}"></label>
        <label><input type="checkbox" name="trackBounds" checked> live confidence bounds</label>
        <label>Population CSV (optional)
          <textarea name="populationCsv" rows="4"
            placeholder="id,book_value,audited_value"></textarea></label>
        <label><input type="checkbox" name="withReplacement" checked> with replacement</label>
        <div id="form-errors" class="errors" role="alert"></div>
        <button type="submit">Start session</button>
      </form>`;
    const form = this.root.querySelector<HTMLFormElement>("#config")!;
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submitConfig(form);
    });
  }

  private readForm(form: HTMLFormElement): FormState {
    const v = (name: string) =>
      (form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement).value;
    const checked = (name: string) =>
      (form.elements.namedItem(name) as HTMLInputElement).checked;
    return {
      direction: v("direction") as FormState["direction"],
      mu: v("mu"),
      alpha: v("alpha"),
      tau: v("tau"),
      policyKind: v("policyKind") as FormState["policyKind"],
      c: v("c"),
      gridLo: v("gridLo"),
      gridHi: v("gridHi"),
      trackBounds: checked("trackBounds"),
      populationCsv: v("populationCsv"),
      withReplacement: checked("withReplacement"),
    };
  }

  private async submitConfig(form: HTMLFormElement): Promise<void> {
    const result = validateForm(this.readForm(form));
    const errBox = this.root.querySelector("#form-errors")!;
    if (result.errors.length > 0 || !result.config) {
      errBox.textContent = result.errors.join("; ");
      return;
    }
    try {
      const summary = await this.api.createSession(result.config);
      this.state.sessionId = summary.id;
      await this.refresh();
    } catch (err) {
      errBox.textContent = err instanceof ApiError ? err.detail : String(err);
    }
  }

  // ------------------------------------------------------------- live view

  private async refresh(): Promise<void> {
    if (!this.state.sessionId) return;
    const view = await this.api.getSession(this.state.sessionId);
    this.renderLiveView(view);
  }

  private renderLiveView(view: SessionView): void {
    const rejected = view.decision === "reject";
    const banner = rejected
      ? `<div class="banner reject" role="status">REJECT &#8212; wealth crossed 1/&#945; at
           observation ${view.rejected_at}; the decision is latched.</div>`
      : `<div class="banner continue" role="status">Continue sampling &#8212; current
           e-value ${view.e_value.toPrecision(4)}.</div>`;
    const bounds =
      view.B_l !== undefined
        ? `<p class="bounds">running bounds:
             B<sub>l</sub> = ${view.B_l === null ? "&#8722;&#8734;" : view.B_l?.toFixed(5)},
             B<sub>u</sub> = ${view.B_u === null ? "+&#8734;" : view.B_u?.toFixed(5)}</p>`
        : "";
    const pending = this.state.pendingItem
      ? `<p class="pending">audit item <b>${this.state.pendingItem.id}</b>
           (book value ${this.state.pendingItem.bookValue}) and enter its taint</p>`
      : "";
    this.root.innerHTML = `
      ${banner}
      <div id="chart">${renderChart(view.trajectory, {
        alpha: view.hypothesis.alpha,
        ghost: this.state.ghost,
      })}</div>
      ${bounds}
      ${pending}
      <form id="observe">
        <input name="value" placeholder="observed taint" autocomplete="off">
        <button type="submit" id="commit">Enter</button>
        <button type="button" id="whatif">What if?</button>
        <button type="button" id="draw">Draw item</button>
        <span id="obs-error" class="errors" role="alert"></span>
        <span id="ghost-note"></span>
      </form>`;
    this.wireLiveControls(view);
  }

  private wireLiveControls(view: SessionView): void {
    const form = this.root.querySelector<HTMLFormElement>("#observe")!;
    const input = form.elements.namedItem("value") as HTMLInputElement;
    const errBox = this.root.querySelector("#obs-error")!;

    const checkedValue = (): number | null => {
      const msg = validateObservation(input.value, view.hypothesis.tau);
      errBox.textContent = msg ?? "";
      return msg === null ? Number(input.value) : null;
    };

    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const x = checkedValue();
      if (x === null || this.state.submitting) return;
      this.state.submitting = true; // one commit, one event: no double-submit
      void this.api
        .postObservation(view.id, x)
        .then(() => {
          this.state.ghost = null;
          this.state.pendingItem = null;
          return this.refresh();
        })
        .catch((err) => {
          errBox.textContent = err instanceof ApiError ? err.detail : String(err);
        })
        .finally(() => {
          this.state.submitting = false;
        });
    });

    this.root.querySelector("#whatif")!.addEventListener("click", () => {
      const x = checkedValue();
      if (x === null) return;
      void this.api.preview(view.id, x).then((ghost: Summary) => {
        this.state.ghost = { k: ghost.n, wealth: ghost.wealth };
        this.renderLiveView(view); // same committed data, plus the ghost point
        this.root.querySelector("#ghost-note")!.textContent =
          `what-if: wealth ${ghost.wealth.toPrecision(4)}, decision ${ghost.decision}`;
      });
    });

    this.root.querySelector("#draw")!.addEventListener("click", () => {
      void this.api
        .draw(view.id)
        .then((d) => {
          this.state.pendingItem = { id: d.item_id, bookValue: d.book_value };
          this.renderLiveView(view);
        })
        .catch((err) => {
          errBox.textContent = err instanceof ApiError ? err.detail : String(err);
        });
    });
  }
}

export function mount(baseUrl: string, rootId = "app"): AuditConsole {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`no element #${rootId}`);
  const console_ = new AuditConsole(new SessionApi(baseUrl), root);
  console_.start();
  return console_;
}
