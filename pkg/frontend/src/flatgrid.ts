import { FlatGrid, PatchClassCode } from "./schemas.js";

/** Build an all-background flat grid. */
export function emptyGrid(
  patchSize: number,
  rows: number,
  cols: number,
): FlatGrid {
  return {
    patch_size: patchSize,
    rows,
    cols,
    classes: new Array(rows * cols).fill(PatchClassCode.Background),
    segments: new Array(4 * rows * cols).fill(0),
  };
}

/** Mark a cell as a single-traversal cell carrying the given segment
 * (coordinates are in the image frame). */
export function setSegmentCell(
  grid: FlatGrid,
  row: number,
  col: number,
  ax: number,
  ay: number,
  bx: number,
  by: number,
): void {
  const k = cellIndex(grid, row, col);
  grid.classes[k] = PatchClassCode.I;
  grid.segments[4 * k] = ax;
  grid.segments[4 * k + 1] = ay;
  grid.segments[4 * k + 2] = bx;
  grid.segments[4 * k + 3] = by;
}

/** Mark a cell as a junction or crossing cell (no segment payload). */
export function setClassCell(
  grid: FlatGrid,
  row: number,
  col: number,
  code: (typeof PatchClassCode)["X" | "T" | "Background"],
): void {
  const k = cellIndex(grid, row, col);
  grid.classes[k] = code;
  grid.segments.fill(0, 4 * k, 4 * k + 4);
}

function cellIndex(grid: FlatGrid, row: number, col: number): number {
  if (row < 0 || row >= grid.rows || col < 0 || col >= grid.cols) {
    throw new RangeError(`cell (${row}, ${col}) outside the grid`);
  }
  return row * grid.cols + col;
}

/** Segment of an I cell as [ax, ay, bx, by], or null for other classes. */
export function segmentAt(
  grid: FlatGrid,
  row: number,
  col: number,
): [number, number, number, number] | null {
  const k = cellIndex(grid, row, col);
  if (grid.classes[k] !== PatchClassCode.I) return null;
  return [
    grid.segments[4 * k]!,
    grid.segments[4 * k + 1]!,
    grid.segments[4 * k + 2]!,
    grid.segments[4 * k + 3]!,
  ];
}
