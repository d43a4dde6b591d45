import { ApiClient, ApiError } from './api';
import type { SeriesWindow, WeightOp } from './types';
import { fullRange, pan, RowWindow, zoomIn, zoomOut } from './zoom';

export interface Selection {
  start: number; // inclusive row index
  end: number; // exclusive
}

/**
 * View-model for the sample-weight editor: real/pred series with an optional
 * reference-factor overlay, a contiguous row selection, and staged weight
 * edits.  All numbers displayed come from the last API response; the store
 * only tracks which window / selection / factor to show.
 */
export class WeightEditorState {
  series: SeriesWindow | null = null;
  window: RowWindow = { from: 0, to: 0 };
  selection: Selection | null = null;
  refFactor: string | null = null;
  /** Net ×2/×0.5 factor staged on the current selection since the last retrain. */
  stagedFactor = 1;
  revision = 0;
  busy = false;
  lastError: string | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly modelId: string,
  ) {}

  get controlsEnabled(): boolean {
    return !this.busy && this.selection !== null;
  }

  async load(totalRows?: number): Promise<void> {
    if (this.window.to === 0 && totalRows !== undefined) this.window = fullRange(totalRows);
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const win = this.window.to > this.window.from ? this.window : undefined;
    this.series = await this.client.getSeries(
      this.modelId,
      win?.from,
      win?.to,
      this.refFactor ?? undefined,
    );
    this.window = { from: this.series.from_row, to: this.series.to_row };
    // the badge always reflects the revision the plotted data came from
    this.revision = this.series.revision;
  }

  select(start: number, end: number): void {
    if (end <= start) throw new Error('selection must cover at least one row');
    this.selection = { start, end };
    this.stagedFactor = 1;
  }

  clearSelection(): void {
    this.selection = null;
    this.stagedFactor = 1;
  }

  async setRefFactor(name: string | null): Promise<void> {
    this.refFactor = name;
    await this.refresh();
  }

  /** One button click: multiply the selected rows' weights by 2 or 0.5. */
  async applyWeightEdit(op: WeightOp): Promise<void> {
    if (!this.selection) throw new Error('no rows selected');
    this.lastError = null;
    try {
      const res = await this.client.editWeights(
        this.modelId,
        op,
        this.selection.start,
        this.selection.end,
      );
      this.stagedFactor *= op === 'increase' ? 2 : 0.5;
      this.revision = Math.max(this.revision, res.revision);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.lastError = 'retraining in progress';
        return;
      }
      throw err;
    }
  }

  async zoomIn(): Promise<void> {
    if (!this.series) return;
    this.window = zoomIn(this.window, this.series.n_rows);
    await this.refresh();
  }

  async zoomOut(): Promise<void> {
    if (!this.series) return;
    this.window = zoomOut(this.window, this.series.n_rows);
    await this.refresh();
  }

  async pan(direction: -1 | 1): Promise<void> {
    if (!this.series) return;
    this.window = pan(this.window, this.series.n_rows, direction);
    await this.refresh();
  }
}
