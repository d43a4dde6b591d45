import { ApiClient, ApiError, pollUntilIdle } from './api';
import type { ConstraintDoc, ConstraintKind, ShapeDoc } from './types';

/**
 * View-model for the shape-function editor: one feature's polyline with its
 * density overlay, the constraint chips for that feature, and the Apply
 * workflow (retrain, poll, refetch).
 */
export class ShapeEditorState {
  feature: string | null = null;
  shape: ShapeDoc | null = null;
  chips: ConstraintDoc[] = [];
  selectedRange: [number, number] | null = null;
  /** True once an edit or constraint was staged and a retrain is pending. */
  applyEnabled = false;
  revision = 0;
  busy = false;
  lastError: string | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly modelId: string,
    private readonly sleep: (ms: number) => Promise<void> = (ms) =>
      new Promise((r) => setTimeout(r, ms)),
  ) {}

  async selectFeature(name: string): Promise<void> {
    this.feature = name;
    this.selectedRange = null;
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.feature) return;
    this.shape = await this.client.getShape(this.modelId, this.feature);
    this.chips = this.shape.constraints;
    this.revision = Math.max(this.revision, this.shape.revision);
  }

  selectRange(lo: number, hi: number): void {
    if (hi <= lo) throw new Error('range must satisfy lo < hi');
    this.selectedRange = [lo, hi];
  }

  /** Stage a constraint on the selected range; the chip mirrors the server list. */
  async imposeConstraint(kind: ConstraintKind): Promise<void> {
    if (!this.feature || !this.selectedRange) throw new Error('select a range first');
    this.lastError = null;
    try {
      await this.client.addConstraint(this.modelId, this.feature, kind, this.selectedRange);
    } catch (err) {
      if (err instanceof ApiError && err.status === 400) {
        // e.g. the range covers fewer than 2 anchors; rendered inline
        this.lastError = err.message;
        return;
      }
      throw err;
    }
    await this.refresh();
    this.applyEnabled = true;
  }

  async deleteConstraint(constraintId: string): Promise<void> {
    await this.client.deleteConstraint(this.modelId, constraintId);
    await this.refresh();
    this.applyEnabled = true;
  }

  /** Weight edits staged elsewhere also arm the Apply button. */
  markDirty(): void {
    this.applyEnabled = true;
  }

  /**
   * Apply: retrain with the staged weights and constraints, poll the job,
   * then refetch the shape so the polyline reflects the new model.
   */
  async applyAndRefresh(intervalMs = 1000): Promise<void> {
    if (!this.applyEnabled) return;
    this.lastError = null;
    this.busy = true;
    try {
      await this.client.retrain(this.modelId);
      const info = await pollUntilIdle(this.client, this.modelId, intervalMs, 600, this.sleep);
      this.revision = Math.max(this.revision, info.revision);
      await this.refresh();
      this.applyEnabled = false;
    } catch (err) {
      // failed job or 409: keep the previous revision on screen
      this.lastError = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
    }
  }
}
