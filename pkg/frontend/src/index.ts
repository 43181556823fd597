export { PalisClient, PalisServiceError } from "./client.js";
export type { PalisClientOptions } from "./client.js";
export { emptyGrid, setClassCell, setSegmentCell, segmentAt } from "./flatgrid.js";
export {
  PatchClassCode,
  aplsParamsSchema,
  backwardResponseSchema,
  flatGraphSchema,
  flatGridSchema,
  rasterParamsSchema,
  rasterizeResponseSchema,
  reconstructParamsSchema,
  scoresResponseSchema,
  topoParamsSchema,
  versionResponseSchema,
} from "./schemas.js";
export type {
  AplsParams,
  BackwardResponse,
  FlatGraph,
  FlatGrid,
  RasterParams,
  RasterizeResponse,
  ReconstructParams,
  ScoresResponse,
  TopoParams,
  VersionResponse,
} from "./schemas.js";
