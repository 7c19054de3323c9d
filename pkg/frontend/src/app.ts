// DOM wiring for the console: macro table, routing playground, training
// wizard and feedback dashboard, all over one ApiClient.

import {
  ApiClient,
  ApiRequestError,
  CallTemplate,
  MacroDraft,
  ParamSpec,
  RouteDecision,
  SlotSpec,
} from "./api.js";
import { decisionBadge, rawRateLabel, scoreLabel, smoothedLabel, splitAtThreshold } from "./format.js";
import { TrainingWizard } from "./wizard.js";

interface PlaygroundEntry {
  utterance: string;
  decision: RouteDecision;
}

export class ConsoleApp {
  readonly wizard: TrainingWizard;
  history: PlaygroundEntry[] = [];
  theta = 0.3;

  constructor(private api: ApiClient, private root: Document) {
    this.wizard = new TrainingWizard(api);
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) {
      throw new Error(`missing element #${id}`);
    }
    return node as T;
  }

  async start(): Promise<void> {
    this.bindTabs();
    this.bindPlayground();
    this.bindWizard();
    this.bindDashboard();
    await this.refreshConfig();
    await this.refreshMacros();
    await this.refreshStats();
  }

  private bindTabs(): void {
    this.root.querySelectorAll<HTMLButtonElement>("nav button[data-tab]").forEach((button) => {
      button.addEventListener("click", () => this.showTab(button.dataset.tab ?? "macros"));
    });
  }

  showTab(name: string): void {
    this.root.querySelectorAll<HTMLElement>("section[data-tab]").forEach((section) => {
      section.hidden = section.dataset.tab !== name;
    });
    this.root.querySelectorAll<HTMLButtonElement>("nav button[data-tab]").forEach((button) => {
      button.classList.toggle("active", button.dataset.tab === name);
    });
  }

  private banner(message: string | null): void {
    const box = this.el<HTMLDivElement>("error-banner");
    box.hidden = !message;
    box.textContent = message ?? "";
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      const value = await work();
      this.banner(null);
      return value;
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.banner(`${error.code}: ${error.message}`);
      } else {
        this.banner(`connection failure: ${String(error)}`);
      }
      return undefined;
    }
  }

  // -- config + macro table ------------------------------------------------

  private async refreshConfig(): Promise<void> {
    const stats = await this.guarded(() => this.api.stats());
    if (stats) {
      this.theta = stats.config.theta;
      this.el<HTMLSpanElement>("theta-value").textContent = String(this.theta);
    }
  }

  async refreshMacros(): Promise<void> {
    const listing = await this.guarded(() => this.api.listMacros());
    if (!listing) {
      return;
    }
    const body = this.el<HTMLTableSectionElement>("macro-rows");
    body.innerHTML = "";
    for (const macro of listing.macros) {
      const row = this.root.createElement("tr");
      const params = macro.params.map((p) => p.name).join(", ");
      for (const text of [
        String(macro.id),
        macro.macro_name,
        macro.use_case,
        macro.scenario_description,
        params,
        rawRateLabel(macro.stats),
      ]) {
        const cell = this.root.createElement("td");
        cell.textContent = text;
        row.appendChild(cell);
      }
      body.appendChild(row);
    }
    this.el<HTMLSpanElement>("macro-count").textContent = String(listing.macros.length);
  }

  // -- playground ------------------------------------------------------------

  private bindPlayground(): void {
    this.el<HTMLFormElement>("playground-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.runPlayground();
    });
    this.el<HTMLButtonElement>("playground-train-cta").addEventListener("click", () => {
      const input = this.el<HTMLInputElement>("playground-input");
      this.el<HTMLTextAreaElement>("wizard-description").value = input.value;
      this.showTab("training");
    });
  }

  async runPlayground(): Promise<RouteDecision | undefined> {
    const utterance = this.el<HTMLInputElement>("playground-input").value;
    const decision = await this.guarded(() => this.api.route(utterance));
    if (!decision) {
      return undefined;
    }
    this.history.unshift({ utterance, decision });
    this.renderDecision(decision);
    this.renderHistory();
    return decision;
  }

  private renderDecision(decision: RouteDecision): void {
    const badge = this.el<HTMLDivElement>("decision-badge");
    badge.textContent = decisionBadge(decision);
    badge.className = `badge ${decision.kind}`;
    this.el<HTMLButtonElement>("playground-train-cta").hidden = decision.kind === "matched";

    const list = this.el<HTMLOListElement>("ranked-list");
    list.innerHTML = "";
    const { above, below } = splitAtThreshold(decision.ranked, this.theta);
    const append = (entries: typeof decision.ranked, cls: string) => {
      for (const entry of entries) {
        const item = this.root.createElement("li");
        item.className = cls;
        if (entry.id === decision.macro_id) {
          item.classList.add("winner");
        }
        item.textContent =
          `${entry.macro_name} — cosine ${scoreLabel(entry.cosine)}, ` +
          `blended ${scoreLabel(entry.blended)}`;
        list.appendChild(item);
      }
    };
    append(above, "above");
    const divider = this.root.createElement("li");
    divider.className = "threshold-line";
    divider.textContent = `— threshold ${this.theta} —`;
    list.appendChild(divider);
    append(below, "below");

    const bindings = this.el<HTMLPreElement>("decision-bindings");
    if (decision.kind === "matched") {
      bindings.hidden = false;
      bindings.textContent = decision.missing_params.length
        ? `missing slots: ${decision.missing_params.join(", ")}`
        : JSON.stringify(decision.bindings, null, 2);
    } else {
      bindings.hidden = true;
    }
  }

  private renderHistory(): void {
    const list = this.el<HTMLUListElement>("playground-history");
    list.innerHTML = "";
    for (const entry of this.history.slice(0, 12)) {
      const item = this.root.createElement("li");
      item.textContent = `${entry.utterance} → ${decisionBadge(entry.decision)}`;
      list.appendChild(item);
    }
  }

  // -- training wizard ----------------------------------------------------------

  private bindWizard(): void {
    this.el<HTMLFormElement>("wizard-describe-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.wizardDescribe();
    });
    this.el<HTMLButtonElement>("wizard-new").addEventListener("click", () => {
      this.wizard.startDraft();
      this.renderWizard();
    });
    this.el<HTMLButtonElement>("wizard-cancel").addEventListener("click", () => {
      this.wizard.cancel();
      this.renderWizard();
    });
    this.el<HTMLButtonElement>("draft-add-param").addEventListener("click", () => {
      this.addParamRow();
    });
    this.el<HTMLButtonElement>("draft-add-call").addEventListener("click", () => {
      this.addCallRow();
    });
    this.el<HTMLFormElement>("wizard-draft-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.wizardCommit();
    });
  }

  async wizardDescribe(): Promise<void> {
    const description = this.el<HTMLTextAreaElement>("wizard-description").value;
    await this.guarded(async () => {
      await this.wizard.describe(description);
      return undefined;
    });
    this.renderWizard();
  }

  private renderWizard(): void {
    this.el<HTMLDivElement>("wizard-stage-idle").hidden = this.wizard.stage !== "idle";
    this.el<HTMLDivElement>("wizard-stage-proposed").hidden = this.wizard.stage !== "proposed";
    this.el<HTMLDivElement>("wizard-stage-drafting").hidden = this.wizard.stage !== "drafting";
    this.el<HTMLDivElement>("wizard-stage-committed").hidden = this.wizard.stage !== "committed";

    if (this.wizard.stage === "proposed") {
      const list = this.el<HTMLUListElement>("wizard-proposals");
      list.innerHTML = "";
      for (const proposal of this.wizard.proposals) {
        const item = this.root.createElement("li");
        const use = this.root.createElement("button");
        use.type = "button";
        use.textContent = "use this";
        use.addEventListener("click", () => {
          this.wizard.acceptExisting(proposal.id);
          this.renderWizard();
        });
        item.textContent = `${proposal.macro_name} — score ${scoreLabel(proposal.score)} `;
        item.appendChild(use);
        list.appendChild(item);
      }
    }
    if (this.wizard.stage === "committed") {
      const note = this.el<HTMLParagraphElement>("wizard-result");
      note.textContent =
        this.wizard.committedId !== null
          ? `macro ${this.wizard.committedId} committed`
          : `using existing macro ${this.wizard.acceptedId}`;
    }
    this.el<HTMLParagraphElement>("wizard-error").textContent = this.wizard.lastError ?? "";
  }

  private addParamRow(name = "", kind = "text", template = ""): void {
    const rows = this.el<HTMLDivElement>("draft-params");
    const row = this.root.createElement("div");
    row.className = "param-row";
    row.innerHTML =
      '<input class="p-name" placeholder="param name" /> ' +
      '<select class="p-kind"><option>text</option><option>number</option></select> ' +
      '<input class="p-template" placeholder="slot template, e.g. on {name} in" />';
    (row.querySelector(".p-name") as HTMLInputElement).value = name;
    (row.querySelector(".p-kind") as HTMLSelectElement).value = kind;
    (row.querySelector(".p-template") as HTMLInputElement).value = template;
    rows.appendChild(row);
  }

  private addCallRow(): void {
    const rows = this.el<HTMLDivElement>("draft-calls");
    const row = this.root.createElement("div");
    row.className = "call-row";
    row.innerHTML =
      '<select class="c-method"><option>GET</option><option>POST</option>' +
      "<option>PUT</option><option>DELETE</option></select> " +
      '<input class="c-url" placeholder="https://host/path?x={param}" /> ' +
      '<input class="c-bindings" placeholder="output bindings: name=path, comma separated" />';
    rows.appendChild(row);
  }

  collectDraft(): MacroDraft {
    const params: ParamSpec[] = [];
    const slots: SlotSpec[] = [];
    this.root.querySelectorAll<HTMLDivElement>("#draft-params .param-row").forEach((row) => {
      const name = (row.querySelector(".p-name") as HTMLInputElement).value.trim();
      if (!name) {
        return;
      }
      const kind = (row.querySelector(".p-kind") as HTMLSelectElement).value as "text" | "number";
      const template = (row.querySelector(".p-template") as HTMLInputElement).value.trim();
      params.push({ name, kind, description: "" });
      slots.push(
        template
          ? { param: name, template, fallback: null }
          : { param: name, template: `{${name}}`, fallback: "remainder" },
      );
    });
    const calls: CallTemplate[] = [];
    this.root.querySelectorAll<HTMLDivElement>("#draft-calls .call-row").forEach((row) => {
      const url = (row.querySelector(".c-url") as HTMLInputElement).value.trim();
      if (!url) {
        return;
      }
      const method = (row.querySelector(".c-method") as HTMLSelectElement)
        .value as CallTemplate["method"];
      const bindingsRaw = (row.querySelector(".c-bindings") as HTMLInputElement).value;
      const output_bindings = bindingsRaw
        .split(",")
        .map((chunk) => chunk.trim())
        .filter(Boolean)
        .map((chunk) => {
          const [bind_name, path] = chunk.split("=", 2);
          return { bind_name: bind_name.trim(), path: (path ?? "").trim() };
        });
      calls.push({
        method,
        url_template: url,
        header_templates: {},
        body_template: null,
        output_bindings,
      });
    });
    return {
      use_case: this.el<HTMLInputElement>("draft-title").value.trim(),
      scenario_description: this.el<HTMLInputElement>("draft-scenario").value.trim(),
      macro_name: this.el<HTMLInputElement>("draft-name").value.trim(),
      params,
      call_templates: calls,
      slot_specs: slots,
    };
  }

  async wizardCommit(): Promise<void> {
    try {
      await this.wizard.commit(this.collectDraft());
    } catch {
      this.renderWizard(); // validation errors stay inline; session keeps drafting
      return;
    }
    this.renderWizard();
    // the new macro is live immediately: no reload, just refresh the views
    await this.refreshMacros();
    await this.refreshStats();
  }

  // -- feedback dashboard ------------------------------------------------------

  private bindDashboard(): void {
    this.el<HTMLButtonElement>("stats-refresh").addEventListener("click", () => {
      void this.refreshStats();
    });
  }

  async refreshStats(): Promise<void> {
    const stats = await this.guarded(() => this.api.stats());
    if (!stats) {
      return;
    }
    const body = this.el<HTMLTableSectionElement>("stats-rows");
    body.innerHTML = "";
    for (const row of stats.macros) {
      const tr = this.root.createElement("tr");

      const name = this.root.createElement("td");
      name.textContent = row.macro_name;

      const raw = this.root.createElement("td");
      raw.textContent = rawRateLabel(row);

      const smoothed = this.root.createElement("td");
      smoothed.className = "smoothed";
      const bar = this.root.createElement("div");
      bar.className = "bar";
      bar.style.width = `${Math.round(row.smoothed_rate * 100)}%`;
      const label = this.root.createElement("span");
      label.textContent = smoothedLabel(row.smoothed_rate);
      smoothed.append(bar, label);

      const actions = this.root.createElement("td");
      for (const outcome of ["success", "failure"] as const) {
        const button = this.root.createElement("button");
        button.type = "button";
        button.textContent = outcome;
        button.addEventListener("click", () => {
          void this.guarded(() => this.api.feedback(row.id, outcome)).then(() =>
            this.refreshStats(),
          );
        });
        actions.appendChild(button);
      }

      tr.append(name, raw, smoothed, actions);
      body.appendChild(tr);
    }
  }
}
