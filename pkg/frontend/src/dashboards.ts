// Dashboards view model. The console renders service aggregates verbatim:
// every number shown is a field from the API response, never recomputed
// client-side. When the service is unreachable the last snapshot stays up
// behind a staleness banner.

import { ApiClient } from "./api.js";
import type { ErrorsDashboard, QualityDashboard } from "./types.js";

export interface DashboardSnapshot {
  quality: QualityDashboard;
  errors: ErrorsDashboard;
  fetchedAt: number;
}

export class DashboardsView {
  snapshot: DashboardSnapshot | null = null;
  stale = false;
  error: string | null = null;

  constructor(private readonly api: ApiClient) {}

  async refresh(now: () => number = Date.now): Promise<void> {
    try {
      const [quality, errors] = await Promise.all([
        this.api.qualityDashboard(),
        this.api.errorsDashboard(),
      ]);
      this.snapshot = { quality, errors, fetchedAt: now() };
      this.stale = false;
      this.error = null;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
      if (this.snapshot !== null) {
        this.stale = true; // keep showing the cached snapshot
      }
    }
  }

  /** Rows flagged when the annotator sits below the service's threshold. */
  qualityRows(): Array<{ annotatorId: string; score: number | null; reviewed: number; flagged: boolean }> {
    if (!this.snapshot) return [];
    const threshold = this.snapshot.quality.threshold;
    return this.snapshot.quality.annotators.map((row) => ({
      annotatorId: row.annotator_id,
      score: row.score,
      reviewed: row.reviewed_count,
      flagged: row.score !== null && row.score < threshold,
    }));
  }
}
