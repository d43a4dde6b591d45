import type {
  ConstraintDoc,
  ConstraintKind,
  DatasetUploadResult,
  ModelInfo,
  SeriesWindow,
  ShapeDoc,
  WeightOp,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Error carrying the HTTP status and the server's `detail` message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = 'ApiError';
  }
}

/**
 * Thin typed client over the service endpoints.  Every number the UI shows
 * comes out of one of these calls; the client does no model math.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { 'Content-Type': 'application/json' } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const doc = await res.json();
        if (typeof doc?.detail === 'string') detail = doc.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  uploadDataset(csvText: string, targetColumn: string, idColumn?: string) {
    return this.request<DatasetUploadResult>('POST', '/datasets', {
      csv_text: csvText,
      target_column: targetColumn,
      id_column: idColumn ?? null,
    });
  }

  createModel(datasetId: string, config: Record<string, unknown> = {}) {
    return this.request<{ model_id: string }>('POST', '/models', {
      dataset_id: datasetId,
      config,
    });
  }

  getModel(modelId: string) {
    return this.request<ModelInfo>('GET', `/models/${modelId}`);
  }

  getSeries(modelId: string, fromRow?: number, toRow?: number, refFactor?: string) {
    const params = new URLSearchParams();
    if (fromRow !== undefined) params.set('from', String(fromRow));
    if (toRow !== undefined) params.set('to', String(toRow));
    if (refFactor !== undefined) params.set('ref_factor', refFactor);
    const query = params.size ? `?${params}` : '';
    return this.request<SeriesWindow>('GET', `/models/${modelId}/series${query}`);
  }

  editWeights(modelId: string, op: WeightOp, start: number, end: number) {
    return this.request<{ revision: number }>('POST', `/models/${modelId}/weights`, {
      op,
      start,
      end,
    });
  }

  addConstraint(modelId: string, feature: string, kind: ConstraintKind, range: [number, number]) {
    return this.request<{ constraint_id: string; revision: number }>(
      'POST',
      `/models/${modelId}/constraints`,
      { feature, kind, range },
    );
  }

  listConstraints(modelId: string) {
    return this.request<{ constraints: ConstraintDoc[] }>('GET', `/models/${modelId}/constraints`);
  }

  deleteConstraint(modelId: string, constraintId: string) {
    return this.request<{ revision: number }>(
      'DELETE',
      `/models/${modelId}/constraints/${constraintId}`,
    );
  }

  retrain(modelId: string) {
    return this.request<{ model_id: string; state: string }>(
      'POST',
      `/models/${modelId}/retrain`,
    );
  }

  getShape(modelId: string, feature: string) {
    return this.request<ShapeDoc>('GET', `/models/${modelId}/shapes/${feature}`);
  }
}

/**
 * Poll the model until the retrain job leaves the running state.
 * Resolves with the final model info; rejects when the job failed.
 */
export async function pollUntilIdle(
  client: ApiClient,
  modelId: string,
  intervalMs = 1000,
  maxPolls = 600,
  sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
): Promise<ModelInfo> {
  for (let i = 0; i < maxPolls; i++) {
    const info = await client.getModel(modelId);
    if (info.state === 'idle') return info;
    if (info.state === 'failed') throw new Error(info.error ?? 'training failed');
    await sleep(intervalMs);
  }
  throw new Error('timed out waiting for retrain to finish');
}
