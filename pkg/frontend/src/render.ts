// Response-bubble rendering: everything derives from the turn API payload;
// there is no client-side inference.

import { escapeHtml, renderHeatmap } from "./heatmap.js";
import type { AttributionPayload, InstancesPayload, TurnPayload, TurnResponse } from "./types.js";

function renderInstanceTable(payload: InstancesPayload): string {
  if (!payload.items.length) return "";
  const keys = Object.keys(payload.items[0].fields);
  const header = ["id", ...keys, "label"].map((k) => `<th>${escapeHtml(k)}</th>`).join("");
  const rows = payload.items
    .map((item) => {
      const cells = keys.map((k) => `<td>${escapeHtml(item.fields[k] ?? "")}</td>`).join("");
      return `<tr><td>${item.id}</td>${cells}<td>${escapeHtml(item.label ?? "")}</td></tr>`;
    })
    .join("");
  return `<table class="instances"><tr>${header}</tr>${rows}</table>`;
}

function renderPayload(payload: TurnPayload): string {
  if (payload.kind === "attribution") {
    return `<div class="payload">${renderHeatmap(payload as AttributionPayload)}</div>`;
  }
  if (payload.kind === "instances") {
    return `<div class="payload">${renderInstanceTable(payload as InstancesPayload)}</div>`;
  }
  return "";
}

export function renderTurnBody(turn: TurnResponse): string {
  const parts = [`<div class="answer">${escapeHtml(turn.response_text)}</div>`];
  if (turn.parse) {
    parts.push(`<div class="parse">parsed as <code>${escapeHtml(turn.parse)}</code></div>`);
  }
  for (const payload of turn.payloads) {
    const rendered = renderPayload(payload);
    if (rendered) parts.push(rendered);
  }
  return parts.join("\n");
}
