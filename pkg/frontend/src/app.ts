// Page wiring: chat window with suggestion chips, dataset viewer, custom
// input panel with history, prompt editor, export. One in-flight turn per
// session: the send button stays disabled while a request is pending.

import { ApiClient } from "./api.js";
import { renderTurnBody } from "./render.js";
import type { SuggestionPayload, TurnResponse } from "./types.js";

const STRATEGY_NOTES: Record<string, string> = {
  zero_cot: "Appends a step-by-step thinking trigger after the instance.",
  plan_and_solve: "Asks the model to first devise a plan, then carry it out step by step.",
  opro: "Uses an optimization-derived encouragement phrasing before reasoning.",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class ChatApp {
  private api = new ApiClient("");
  private sessionId: string | null = null;
  private datasetName: string | null = null;
  private pending = false;

  async start(): Promise<void> {
    const session = await this.api.createSession();
    this.sessionId = session.session_id;
    await this.loadOperations();
    await this.loadDataset();
    await this.refreshHistory();
    this.bind();
    this.systemNote("Session ready. Ask about the data or the model's behavior.");
  }

  private bind(): void {
    el<HTMLButtonElement>("send").addEventListener("click", () => void this.send());
    el<HTMLInputElement>("input").addEventListener("keydown", (event) => {
      if (event.key === "Enter" && !event.shiftKey) {
        event.preventDefault();
        void this.send();
      }
    });
    el<HTMLButtonElement>("export").addEventListener("click", () => void this.export());
    el<HTMLButtonElement>("add-custom").addEventListener("click", () => void this.addCustomInput());
    el<HTMLSelectElement>("expertise").addEventListener("change", () => void this.pushSettings());
    el<HTMLSelectElement>("cot").addEventListener("change", () => {
      el<HTMLSpanElement>("cot-note").textContent = STRATEGY_NOTES[el<HTMLSelectElement>("cot").value] ?? "";
      void this.pushSettings();
    });
    el<HTMLSelectElement>("strategy").addEventListener("change", () => void this.pushSettings());
    el<HTMLButtonElement>("apply-overrides").addEventListener("click", () => void this.pushSettings());
  }

  private systemNote(text: string): void {
    const bubble = document.createElement("div");
    bubble.className = "msg system";
    bubble.textContent = text;
    el("messages").appendChild(bubble);
  }

  private addUserBubble(text: string): void {
    const bubble = document.createElement("div");
    bubble.className = "msg user";
    bubble.textContent = text;
    el("messages").appendChild(bubble);
    el("messages").scrollTop = el("messages").scrollHeight;
  }

  private addResponseBubble(turn: TurnResponse): void {
    const bubble = document.createElement("div");
    bubble.className = turn.clarification ? "msg assistant clarification" : "msg assistant";
    bubble.innerHTML = renderTurnBody(turn);
    if (turn.suggestion) {
      bubble.appendChild(this.suggestionChip(turn.suggestion));
    }
    el("messages").appendChild(bubble);
    el("messages").scrollTop = el("messages").scrollHeight;
  }

  private suggestionChip(suggestion: SuggestionPayload): HTMLElement {
    const wrap = document.createElement("div");
    wrap.className = "suggestion";
    const label = document.createElement("span");
    label.textContent = suggestion.question;
    const accept = document.createElement("button");
    accept.textContent = "Yes";
    accept.className = "chip accept";
    accept.addEventListener("click", () => {
      // the chip sends the suggested question verbatim as the next turn
      void this.send(suggestion.question);
    });
    const decline = document.createElement("button");
    decline.textContent = "No";
    decline.className = "chip decline";
    decline.addEventListener("click", () => void this.send("no thanks"));
    wrap.append(label, accept, decline);
    return wrap;
  }

  private async send(preset?: string): Promise<void> {
    if (this.pending || !this.sessionId) return;
    const input = el<HTMLInputElement>("input");
    const text = preset ?? input.value.trim();
    if (!text) return;
    if (!preset) input.value = "";
    this.pending = true;
    el<HTMLButtonElement>("send").disabled = true;
    this.addUserBubble(text);
    try {
      const turn = await this.api.sendTurn(this.sessionId, text);
      this.addResponseBubble(turn);
      await this.refreshDatasetIfChanged(turn);
    } catch (error) {
      this.systemNote(`request failed: ${String(error)}`);
    } finally {
      this.pending = false;
      el<HTMLButtonElement>("send").disabled = false;
    }
  }

  private async refreshDatasetIfChanged(turn: TurnResponse): Promise<void> {
    if (turn.payloads.some((p) => p.kind === "text" && (p as { subkind?: string }).subkind === "augment")) {
      // an augmentation is offered as a custom-input candidate; surface it
      const payload = turn.payloads.find(
        (p) => (p as { subkind?: string }).subkind === "augment",
      ) as { candidate_fields?: Record<string, string> } | undefined;
      if (payload?.candidate_fields) {
        el<HTMLTextAreaElement>("custom-fields").value = JSON.stringify(payload.candidate_fields, null, 2);
      }
    }
  }

  private async pushSettings(): Promise<void> {
    if (!this.sessionId) return;
    let overrides: Record<string, string> | undefined;
    const raw = el<HTMLTextAreaElement>("overrides").value.trim();
    if (raw) {
      try {
        overrides = JSON.parse(raw) as Record<string, string>;
      } catch {
        el<HTMLSpanElement>("settings-error").textContent = "overrides must be a JSON object";
        return;
      }
    }
    try {
      await this.api.putSettings(this.sessionId, {
        expertise: el<HTMLSelectElement>("expertise").value,
        cot_strategy: el<HTMLSelectElement>("cot").value,
        parsing_strategy: el<HTMLSelectElement>("strategy").value,
        ...(overrides ? { prompt_overrides: overrides } : {}),
      });
      el<HTMLSpanElement>("settings-error").textContent = "";
    } catch (error) {
      el<HTMLSpanElement>("settings-error").textContent = String(error);
    }
  }

  private async loadOperations(): Promise<void> {
    const doc = await this.api.operations();
    const list = el("operations");
    list.innerHTML = "";
    for (const op of doc.operations) {
      const item = document.createElement("li");
      item.innerHTML = `<code>${op.name}</code> <em>${op.category}</em> — ${op.description}`;
      list.appendChild(item);
    }
  }

  private async loadDataset(): Promise<void> {
    const health = await this.api.health();
    el("health").textContent = `backend: ${health.status}`;
    // dataset name discovery: probe via export-less metadata in the page config
    const probe = await fetch("/api/datasets/__probe__/instances");
    if (probe.status === 404) {
      const body = (await probe.json()) as { error?: { message?: string } };
      const match = /'([^']+)'/.exec(body.error?.message ?? "");
      this.datasetName = match ? match[1] : null;
    }
    if (!this.datasetName) return;
    const page = await this.api.listInstances(this.datasetName, 0, 25);
    el("dataset-title").textContent = `${page.name} (${page.task}, ${page.total} instances)`;
    const table = el("dataset");
    table.innerHTML = "";
    for (const row of page.instances) {
      const tr = document.createElement("tr");
      const fields = Object.values(row.fields).join(" | ");
      tr.innerHTML = `<td>${row.id}</td><td>${fields}</td><td>${row.label ?? ""}</td>`;
      table.appendChild(tr);
    }
  }

  private async refreshHistory(): Promise<void> {
    const history = await this.api.listCustomInputs();
    const list = el("custom-history");
    list.innerHTML = "";
    for (const record of history.history) {
      const item = document.createElement("li");
      item.textContent = `#${record.id}: ${Object.values(record.fields).join(" | ")}`;
      list.appendChild(item);
    }
  }

  private async addCustomInput(): Promise<void> {
    const raw = el<HTMLTextAreaElement>("custom-fields").value.trim();
    if (!raw) return;
    try {
      const fields = JSON.parse(raw) as Record<string, unknown>;
      const created = await this.api.addCustomInput(fields);
      this.systemNote(`added custom input #${created.instance.id}`);
      await this.refreshHistory();
      await this.loadDataset();
    } catch (error) {
      this.systemNote(`could not add custom input: ${String(error)}`);
    }
  }

  private async export(): Promise<void> {
    if (!this.sessionId) return;
    const doc = await this.api.exportSession(this.sessionId);
    const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `dialogue-${this.sessionId}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  }
}

if (typeof document !== "undefined" && document.getElementById("messages")) {
  void new ChatApp().start();
}
