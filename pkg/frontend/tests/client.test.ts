import { describe, expect, it } from "vitest";

import { PalisClient, PalisServiceError } from "../src/client.js";
import {
  emptyGrid,
  segmentAt,
  setClassCell,
  setSegmentCell,
} from "../src/flatgrid.js";
import { PatchClassCode, flatGridSchema } from "../src/schemas.js";

const baseUrl = process.env.PALIS_URL ?? "http://127.0.0.1:8765";
const client = new PalisClient({ baseUrl });

describe("flat grid helpers", () => {
  it("builds well-formed buffers", () => {
    const grid = emptyGrid(8, 2, 3);
    setSegmentCell(grid, 0, 1, 8, 4, 16, 4);
    setClassCell(grid, 1, 2, PatchClassCode.X);
    expect(() => flatGridSchema.parse(grid)).not.toThrow();
    expect(grid.classes[1]).toBe(PatchClassCode.I);
    expect(segmentAt(grid, 0, 1)).toEqual([8, 4, 16, 4]);
    expect(segmentAt(grid, 1, 2)).toBeNull();
  });

  it("rejects out-of-range cells", () => {
    const grid = emptyGrid(8, 1, 1);
    expect(() => setSegmentCell(grid, 0, 5, 0, 0, 1, 1)).toThrow(RangeError);
  });
});

describe("request validation", () => {
  it("rejects mismatched buffers locally", async () => {
    const grid = emptyGrid(8, 1, 1);
    grid.classes.push(0);
    await expect(client.rasterize(grid, 8, 8)).rejects.toThrow();
  });

  it("rejects undersized upstream buffers locally", async () => {
    const grid = emptyGrid(8, 1, 1);
    await expect(client.backward(grid, 8, 8, [0, 1])).rejects.toThrow(
      RangeError,
    );
  });

  it("maps service-side semantic errors to PalisServiceError", async () => {
    const grid = emptyGrid(8, 1, 1);
    // segment escapes its cell: the service rejects the grid with a 422
    setSegmentCell(grid, 0, 0, 0, 0, 100, 100);
    await expect(client.rasterize(grid, 8, 8)).rejects.toThrow(
      PalisServiceError,
    );
  });
});

describe("round trip through the service", () => {
  it("rasterizes a one-cell grid to values in (0, 1]", async () => {
    const grid = emptyGrid(8, 1, 1);
    setSegmentCell(grid, 0, 0, 0.5, 3.5, 7.5, 3.5);
    const res = await client.rasterize(grid, 8, 8);
    expect(res.values.length).toBe(64);
    expect(Math.max(...res.values)).toBeCloseTo(1, 9);
    for (const v of res.values) {
      expect(v).toBeGreaterThan(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });

  it("reconstructs two aligned cells into one road", async () => {
    const grid = emptyGrid(8, 1, 2);
    setSegmentCell(grid, 0, 0, 0, 4, 8, 4);
    setSegmentCell(grid, 0, 1, 8, 4, 16, 4);
    const graph = await client.reconstruct(grid);
    expect(graph.nodes.length / 2).toBe(3); // shared endpoint merged
    expect(graph.edges.length / 2).toBe(2);
  });
});
