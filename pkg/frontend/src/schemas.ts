import { z } from "zod";

/** Patch class codes used in flat grid buffers. */
export const PatchClassCode = {
  Background: 0,
  I: 1,
  X: 2,
  T: 3,
} as const;

export const rasterParamsSchema = z.object({
  tau_inv: z.number().positive().default(8),
  t_out: z.number().default(10),
  t_in: z.number().default(1),
});
export type RasterParams = z.infer<typeof rasterParamsSchema>;

export const flatGridSchema = z
  .object({
    patch_size: z.number().int().positive(),
    rows: z.number().int().positive(),
    cols: z.number().int().positive(),
    classes: z.array(z.number().int().min(0).max(3)),
    segments: z.array(z.number()),
  })
  .refine((g) => g.classes.length === g.rows * g.cols, {
    message: "classes buffer must hold rows*cols entries",
  })
  .refine((g) => g.segments.length === 4 * g.rows * g.cols, {
    message: "segments buffer must hold 4*rows*cols entries",
  });
export type FlatGrid = z.infer<typeof flatGridSchema>;

export const flatGraphSchema = z
  .object({
    nodes: z.array(z.number()),
    edges: z.array(z.number().int().nonnegative()),
  })
  .refine((g) => g.nodes.length % 2 === 0, {
    message: "nodes buffer must hold x,y pairs",
  })
  .refine((g) => g.edges.length % 2 === 0, {
    message: "edges buffer must hold index pairs",
  });
export type FlatGraph = z.infer<typeof flatGraphSchema>;

export const rasterizeResponseSchema = z.object({
  height: z.number().int().positive(),
  width: z.number().int().positive(),
  values: z.array(z.number()),
});
export type RasterizeResponse = z.infer<typeof rasterizeResponseSchema>;

export const backwardResponseSchema = z.object({
  gradients: z.array(z.number()),
});
export type BackwardResponse = z.infer<typeof backwardResponseSchema>;

export const reconstructParamsSchema = z.object({
  tau_d: z.number().positive().default(2),
  tau_a: z.number().positive().max(90).default(15),
  neighbor_radius: z.number().int().min(1).default(1),
});
export type ReconstructParams = z.infer<typeof reconstructParamsSchema>;

export const aplsParamsSchema = z.object({
  control_point_spacing: z.number().positive().default(16),
  snap_radius: z.number().positive().default(8),
});
export type AplsParams = z.infer<typeof aplsParamsSchema>;

export const topoParamsSchema = z.object({
  seed_interval: z.number().positive().default(16),
  match_radius: z.number().positive().default(8),
  propagation_radius: z.number().positive().default(300),
  marble_interval: z.number().positive().default(5),
});
export type TopoParams = z.infer<typeof topoParamsSchema>;

export const scoresResponseSchema = z.object({
  apls: z.number(),
  topo_precision: z.number(),
  topo_recall: z.number(),
  topo_f1: z.number(),
});
export type ScoresResponse = z.infer<typeof scoresResponseSchema>;

export const versionResponseSchema = z.object({
  service: z.string(),
  format: z.number().int(),
});
export type VersionResponse = z.infer<typeof versionResponseSchema>;
