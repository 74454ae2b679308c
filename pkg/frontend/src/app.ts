// Campaign view: polls the service, renders the estimate heatmap, the
// suggestion panel and the progress chart, and submits observations. All
// state lives on the server; every change here round-trips.

import { ApiError, CampaignApi } from './api';
import { renderEstimate, renderPlaceholder } from './heatmap';
import { renderMetrics } from './metrics';
import { parseTrajectoryCsv, validateStart } from './trajectory';
import type { CampaignDetail, ObservationBody } from './types';

export const POLL_INTERVAL_MS = 2000;
const ESTIMATE_RESOLUTION = 60;

export class CampaignView {
  private detail: CampaignDetail | null = null;
  private renderedQueries = -1;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private root: HTMLElement,
    private api: CampaignApi,
    private campaignId: string,
  ) {
    this.root.innerHTML = `
      <div class="status-bar">
        <span data-role="campaign-name"></span>
        <span data-role="status"></span>
        <span data-role="episode"></span>
        <span data-role="labeled"></span>
      </div>
      <div data-role="banner" class="banner" hidden></div>
      <div class="columns">
        <div data-role="heatmap" class="heatmap-box"></div>
        <div class="side-panel">
          <div data-role="suggestion" class="suggestion-panel"></div>
          <form data-role="observation-form">
            <fieldset data-role="label-choice">
              <legend>observed attractor</legend>
            </fieldset>
            <label class="traj-label">trajectory (optional, CSV t,x,v)
              <textarea data-role="trajectory" rows="5"></textarea>
            </label>
            <div data-role="form-error" class="form-error" hidden></div>
            <button type="submit" data-role="submit">submit observation</button>
            <button type="button" data-role="report-failure">report failed run</button>
          </form>
          <div data-role="metrics" class="metrics-box"></div>
        </div>
      </div>`;
    const form = this.el('observation-form') as HTMLFormElement;
    form.addEventListener('submit', (ev) => {
      ev.preventDefault();
      void this.submit(false);
    });
    (this.el('report-failure') as HTMLButtonElement).addEventListener('click', () => {
      void this.submit(true);
    });
  }

  el(role: string): HTMLElement {
    const node = this.root.querySelector(`[data-role="${role}"]`);
    if (!node) throw new Error(`missing element ${role}`);
    return node as HTMLElement;
  }

  start(): void {
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  async refresh(): Promise<void> {
    try {
      this.detail = await this.api.getCampaign(this.campaignId);
    } catch (err) {
      this.showBanner(`cannot reach campaign: ${(err as Error).message}`, 'error');
      return;
    }
    this.renderStatus();
    this.renderSuggestion();
    await this.renderMetricsPanel();
    await this.renderHeatmap();
  }

  private renderStatus(): void {
    const d = this.detail!;
    this.el('campaign-name').textContent = d.id;
    this.el('status').textContent = d.status;
    this.el('episode').textContent = `episode ${d.episode}/${d.episodes_total}`;
    this.el('labeled').textContent = `${d.labeled_count} labeled from ${d.queries} queries`;
    if (d.status === 'finished') {
      this.showBanner('campaign finished: all episodes observed', 'done');
      (this.el('submit') as HTMLButtonElement).disabled = true;
      (this.el('report-failure') as HTMLButtonElement).disabled = true;
    }
    const choice = this.el('label-choice');
    const wanted = d.attractors.length
      ? d.attractors.map((a) => a.id)
      : [0, 1];
    if (choice.querySelectorAll('input').length !== wanted.length) {
      choice.replaceChildren(choice.firstElementChild as HTMLElement);
      for (const id of wanted) {
        const lab = document.createElement('label');
        const radio = document.createElement('input');
        radio.type = 'radio';
        radio.name = 'attractor';
        radio.value = String(id);
        lab.appendChild(radio);
        lab.appendChild(document.createTextNode(` attractor ${id}`));
        choice.appendChild(lab);
      }
    }
  }

  private renderSuggestion(): void {
    const panel = this.el('suggestion');
    const s = this.detail!.suggestion;
    if (!s) {
      panel.textContent =
        this.detail!.status === 'finished' ? 'no further experiments needed' : 'no suggestion yet';
      return;
    }
    panel.innerHTML = '';
    const head = document.createElement('div');
    head.className = 'suggestion-head';
    head.textContent = `next experiment (${s.method}${s.episode ? `, episode ${s.episode}` : ''})`;
    const state = document.createElement('div');
    state.className = 'suggestion-state';
    state.dataset.suggestionId = s.suggestion_id;
    state.textContent = `x0 = ${s.state[0].toFixed(4)}, v0 = ${s.state[1].toFixed(4)}`;
    panel.append(head, state);
  }

  private async renderMetricsPanel(): Promise<void> {
    try {
      const metrics = await this.api.getMetrics(this.campaignId);
      renderMetrics(this.el('metrics'), metrics);
    } catch {
      // metrics are cosmetic; keep the previous chart on transient errors
    }
  }

  private async renderHeatmap(): Promise<void> {
    const d = this.detail!;
    if (d.queries === this.renderedQueries) return; // nothing new to draw
    try {
      const raster = await this.api.getEstimate(this.campaignId, ESTIMATE_RESOLUTION);
      renderEstimate(this.el('heatmap'), raster, d.domain);
      this.renderedQueries = d.queries;
    } catch (err) {
      if (err instanceof ApiError && err.code === 'not_ready') {
        renderPlaceholder(this.el('heatmap'), 'estimate not ready: need both attractors observed');
      } else {
        renderPlaceholder(this.el('heatmap'), `estimate unavailable: ${(err as Error).message}`);
      }
    }
  }

  async submit(failed: boolean): Promise<void> {
    const d = this.detail;
    if (!d || !d.suggestion) {
      this.showFormError('no outstanding suggestion');
      return;
    }
    const body: ObservationBody = { suggestion_id: d.suggestion.suggestion_id };
    if (failed) {
      body.failed = true;
    } else {
      const chosen = this.root.querySelector<HTMLInputElement>('input[name="attractor"]:checked');
      if (!chosen) {
        this.showFormError('pick the observed attractor first');
        return;
      }
      body.label = Number(chosen.value);
      const text = (this.el('trajectory') as HTMLTextAreaElement).value;
      const parsed = parseTrajectoryCsv(text);
      if (parsed.error) {
        this.showFormError(parsed.error);
        return;
      }
      if (parsed.rows) {
        const startError = validateStart(parsed.rows, d.suggestion.state);
        if (startError) {
          this.showFormError(startError);
          return;
        }
        body.trajectory = parsed.rows;
      }
    }
    this.clearFormError();
    try {
      await this.api.submitObservation(this.campaignId, body);
      (this.el('trajectory') as HTMLTextAreaElement).value = '';
      this.hideBanner();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.showBanner(`suggestion is stale: ${err.message}`, 'conflict');
      } else {
        this.showBanner(`observation rejected: ${(err as Error).message}`, 'error');
      }
    }
    await this.refresh();
  }

  private showBanner(text: string, kind: string): void {
    const banner = this.el('banner');
    banner.textContent = text;
    banner.className = `banner banner-${kind}`;
    banner.removeAttribute('hidden');
  }

  private hideBanner(): void {
    this.el('banner').setAttribute('hidden', '');
  }

  private showFormError(text: string): void {
    const box = this.el('form-error');
    box.textContent = text;
    box.removeAttribute('hidden');
  }

  private clearFormError(): void {
    this.el('form-error').setAttribute('hidden', '');
  }
}
