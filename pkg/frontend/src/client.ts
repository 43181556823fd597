import {
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
  backwardResponseSchema,
  flatGraphSchema,
  flatGridSchema,
  rasterizeResponseSchema,
  scoresResponseSchema,
  versionResponseSchema,
} from "./schemas.js";

export class PalisServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`service returned ${status}: ${detail}`);
    this.name = "PalisServiceError";
  }
}

export interface PalisClientOptions {
  baseUrl: string;
  fetchImpl?: typeof fetch;
}

/** HTTP client for the road-graph service; all payloads are validated
 * locally before they leave and after they arrive. */
export class PalisClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(options: PalisClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.fetchImpl = options.fetchImpl ?? fetch;
  }

  async health(): Promise<boolean> {
    const res = await this.fetchImpl(`${this.baseUrl}/health`);
    return res.ok;
  }

  async version(): Promise<VersionResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/version`);
    if (!res.ok) throw new PalisServiceError(res.status, await res.text());
    return versionResponseSchema.parse(await res.json());
  }

  /** Render a flat grid into a row-major soft-mask float buffer. */
  async rasterize(
    grid: FlatGrid,
    height: number,
    width: number,
    params?: Partial<RasterParams>,
  ): Promise<RasterizeResponse> {
    const body = {
      grid: flatGridSchema.parse(grid),
      height,
      width,
      ...(params ? { params } : {}),
    };
    const json = await this.post("/rasterize", body);
    return rasterizeResponseSchema.parse(json);
  }

  /** Endpoint gradients of sum(upstream * soft mask): 4 numbers per cell. */
  async backward(
    grid: FlatGrid,
    height: number,
    width: number,
    upstream: readonly number[],
    params?: Partial<RasterParams>,
  ): Promise<BackwardResponse> {
    if (upstream.length !== height * width) {
      throw new RangeError(
        `upstream buffer has ${upstream.length} entries, expected ${height * width}`,
      );
    }
    const body = {
      grid: flatGridSchema.parse(grid),
      height,
      width,
      upstream,
      ...(params ? { params } : {}),
    };
    const json = await this.post("/backward", body);
    return backwardResponseSchema.parse(json);
  }

  /** Rebuild a road graph (flat node/edge buffers) from a grid. */
  async reconstruct(
    grid: FlatGrid,
    params?: Partial<ReconstructParams>,
  ): Promise<FlatGraph> {
    const body = {
      grid: flatGridSchema.parse(grid),
      ...(params ? { params } : {}),
    };
    const json = await this.post("/reconstruct", body);
    return flatGraphSchema.parse(json);
  }

  /** Score a proposal graph against a reference graph. */
  async scores(
    gt: FlatGraph,
    prop: FlatGraph,
    options?: {
      apls?: Partial<AplsParams>;
      topo?: Partial<TopoParams>;
    },
  ): Promise<ScoresResponse> {
    const body = {
      gt: flatGraphSchema.parse(gt),
      prop: flatGraphSchema.parse(prop),
      ...(options?.apls ? { apls_params: options.apls } : {}),
      ...(options?.topo ? { topo_params: options.topo } : {}),
    };
    const json = await this.post("/scores", body);
    return scoresResponseSchema.parse(json);
  }

  private async post(path: string, body: unknown): Promise<unknown> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      throw new PalisServiceError(res.status, await res.text());
    }
    return res.json();
  }
}
