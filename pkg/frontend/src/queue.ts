// Arbitration queue view model: paged, filterable, oldest first (the
// service guarantees the ordering). Service errors never wipe the last
// good page; they surface as a banner instead.

import { ApiClient } from "./api.js";
import type { QueueItem } from "./types.js";

export interface QueueFilters {
  locale?: string;
  phase?: string;
}

export class QueueView {
  items: QueueItem[] = [];
  total = 0;
  page = 1;
  pageSize = 20;
  filters: QueueFilters = {};
  error: string | null = null;
  loaded = false;

  constructor(private readonly api: ApiClient) {}

  get empty(): boolean {
    return this.loaded && this.total === 0;
  }

  async refresh(): Promise<void> {
    try {
      const data = await this.api.queue({
        locale: this.filters.locale,
        phase: this.filters.phase,
        page: this.page,
        pageSize: this.pageSize,
      });
      this.items = data.items;
      this.total = data.total;
      this.error = null;
      this.loaded = true;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
  }

  async setFilters(filters: QueueFilters): Promise<void> {
    this.filters = filters;
    this.page = 1;
    await this.refresh();
  }

  async nextPage(): Promise<void> {
    if (this.page * this.pageSize >= this.total) return;
    this.page += 1;
    await this.refresh();
  }
}
