// Token heatmap: tokens tinted by normalized |score|, top-k outlined,
// raw score on hover. Pure string-producing functions so they test without
// a DOM; payload mismatches fall back to plain text instead of crashing.

import type { AttributionPayload } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export interface HeatCell {
  token: string;
  score: number;
  intensity: number; // |score| / max|score|, 0 when all scores are 0
  topk: boolean;
}

export function heatmapCells(payload: {
  tokens: string[];
  scores: number[];
  top_indices?: number[];
}): HeatCell[] | null {
  const { tokens, scores } = payload;
  if (!Array.isArray(tokens) || !Array.isArray(scores)) return null;
  if (tokens.length === 0 || tokens.length !== scores.length) return null;
  const magnitudes = scores.map((s) => Math.abs(s));
  const peak = Math.max(...magnitudes);
  const top = new Set(payload.top_indices ?? []);
  return tokens.map((token, i) => ({
    token,
    score: scores[i],
    intensity: peak > 0 ? magnitudes[i] / peak : 0,
    topk: top.has(i),
  }));
}

export function renderHeatmap(payload: AttributionPayload | { tokens?: unknown; scores?: unknown }): string {
  const cells = heatmapCells(payload as { tokens: string[]; scores: number[]; top_indices?: number[] });
  if (cells === null) {
    const fallback =
      Array.isArray((payload as { tokens?: unknown }).tokens)
        ? ((payload as { tokens: string[] }).tokens ?? []).join(" ")
        : "";
    return `<span class="heatmap-fallback">${escapeHtml(fallback || "(no attribution data)")}</span>`;
  }
  const spans = cells.map((cell) => {
    const alpha = (0.12 + 0.68 * cell.intensity).toFixed(3);
    const classes = cell.topk ? "heat-token topk" : "heat-token";
    const style = `background: rgba(255, 138, 34, ${alpha})`;
    const title = `score ${cell.score}`;
    return `<span class="${classes}" style="${style}" title="${escapeHtml(title)}">${escapeHtml(cell.token)}</span>`;
  });
  return `<span class="heatmap">${spans.join(" ")}</span>`;
}
