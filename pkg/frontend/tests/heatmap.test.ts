import { describe, expect, it } from "vitest";

import { escapeHtml, heatmapCells, renderHeatmap } from "../src/heatmap.js";
import type { AttributionPayload } from "../src/types.js";

function payload(overrides: Partial<AttributionPayload> = {}): AttributionPayload {
  return {
    kind: "attribution",
    id: 0,
    method: "attention",
    tokens: ["the", "covid", "vaccine", "works"],
    scores: [0.1, 0.4, 0.4, 0.1],
    topk: 2,
    top_indices: [1, 2],
    ...overrides,
  };
}

describe("heatmapCells", () => {
  it("renders aligned tokens/scores payloads", () => {
    const cells = heatmapCells(payload())!;
    expect(cells).toHaveLength(4);
    expect(cells.map((c) => c.token)).toEqual(["the", "covid", "vaccine", "works"]);
  });

  it("uniform scores give uniform tint", () => {
    const cells = heatmapCells(payload({ scores: [0.25, 0.25, 0.25, 0.25] }))!;
    const intensities = new Set(cells.map((c) => c.intensity));
    expect(intensities.size).toBe(1);
    expect([...intensities][0]).toBe(1);
  });

  it("a dominant token is visibly distinct and outlined", () => {
    const cells = heatmapCells(
      payload({ scores: [0.01, 0.9, 0.02, 0.01], top_indices: [1] }),
    )!;
    expect(cells[1].intensity).toBe(1);
    expect(cells[1].topk).toBe(true);
    expect(Math.max(cells[0].intensity, cells[2].intensity, cells[3].intensity)).toBeLessThan(0.05);
    expect(cells[0].topk).toBe(false);
  });

  it("negative scores tint by magnitude", () => {
    const cells = heatmapCells(payload({ scores: [-0.8, 0.2, 0.1, 0.05] }))!;
    expect(cells[0].intensity).toBe(1);
  });

  it("rejects mismatched lengths", () => {
    expect(heatmapCells(payload({ scores: [0.1, 0.2] }))).toBeNull();
  });

  it("rejects empty payloads", () => {
    expect(heatmapCells(payload({ tokens: [], scores: [] }))).toBeNull();
  });
});

describe("renderHeatmap", () => {
  it("emits one span per token with hover scores", () => {
    const html = renderHeatmap(payload());
    expect(html.match(/class="heat-token/g)).toHaveLength(4);
    expect(html).toContain('title="score 0.4"');
    expect(html.match(/topk/g)).toHaveLength(2);
  });

  it("mismatched payload falls back to plain text without crashing", () => {
    const html = renderHeatmap(payload({ scores: [1] }));
    expect(html).toContain("heatmap-fallback");
    expect(html).toContain("the covid vaccine works");
  });

  it("empty payload falls back gracefully", () => {
    const html = renderHeatmap({});
    expect(html).toContain("heatmap-fallback");
    expect(html).toContain("(no attribution data)");
  });

  it("escapes markup in tokens", () => {
    const html = renderHeatmap(payload({ tokens: ["<img>", "b", "c", "d"] }));
    expect(html).toContain("&lt;img&gt;");
    expect(html).not.toContain("<img>");
  });
});

describe("escapeHtml", () => {
  it("escapes all five specials", () => {
    expect(escapeHtml(`<a href="x">&'</a>`)).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&#39;&lt;/a&gt;");
  });
});
