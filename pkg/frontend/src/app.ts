/** The dashboard: a run list with a create form, and per-run pages that
 * launch stages, poll state, and render each stage's artifacts.
 *
 * Rendering is one-way: every view is rebuilt from the latest service
 * payloads, and displayed numbers are payload values verbatim (modulo
 * digit formatting). The client never mutates scientific values.
 */

import { ApiClient, ServiceError } from './api.js';
import { buildDistributionPanel } from './chart.js';
import { clear, h } from './dom.js';
import { collectOverrides, FORM_FIELDS, validateForm, type FormValues } from './form.js';
import { countLabel, criterionLabel, fmtFixed, propertySymbol } from './format.js';
import { Poller, POLL_INTERVAL_MS } from './poll.js';
import { anyRunning, nextEligibleStage, STAGE_SUMMARIES, STAGE_TITLES, STAGES } from './stages.js';
import type { CandidateRow, CriterionPayload, DistributionPayload, RankedRow, RunStatePayload } from './types.js';

const STAGE_COUNT_KEYS: Record<number, string[]> = {
  1: ['n_documents', 'n_chunks', 'n_ranked', 'n_records'],
  2: ['n_dataset', 'n_derived', 'n_literature'],
  3: ['n_generated', 'n_passed_filters', 'n_meets_criterion', 'n_stable'],
};

function describe(err: unknown): string {
  if (err instanceof ServiceError) return `${err.error}: ${err.detail}`;
  if (err instanceof Error) return `service unreachable (${err.message})`;
  return String(err);
}

function badge(status: string): HTMLElement {
  return h('span', { class: `badge badge-${status}` }, status);
}

export class App {
  private page: RunPage | null = null;

  constructor(
    private readonly host: HTMLElement,
    private readonly api: ApiClient,
    private readonly pollMs = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    window.addEventListener('hashchange', () => void this.route());
    void this.route();
  }

  route(): Promise<void> {
    const match = /^#\/runs\/([A-Za-z0-9_.-]+)$/.exec(window.location.hash);
    return match ? this.openRun(match[1]!) : this.openList();
  }

  async openRun(runId: string): Promise<void> {
    // the hashchange after a form submit lands here again; keep it idempotent
    if (this.page?.runId === runId) return;
    this.page?.dispose();
    this.page = new RunPage(this.host, this.api, runId, this.pollMs);
    await this.page.open();
  }

  async openList(): Promise<void> {
    this.page?.dispose();
    this.page = null;
    clear(this.host);
    const section = h('section', { class: 'run-list' }, h('h2', {}, 'runs'));
    try {
      const runs = await this.api.listRuns();
      if (runs.length === 0) {
        section.append(h('p', { class: 'notice' }, 'no runs yet'));
      } else {
        const table = h('table', { class: 'runs' });
        table.append(h('tr', {}, h('th', {}, 'run'), h('th', {}, 'stage 1'), h('th', {}, 'stage 2'), h('th', {}, 'stage 3')));
        for (const run of runs) {
          const link = h('a', { href: `#/runs/${run.run_id}` }, run.run_id);
          table.append(
            h('tr', {},
              h('td', {}, link),
              ...STAGES.map((n) => h('td', {}, badge(run.stages[String(n)] ?? 'pending'))),
            ),
          );
        }
        section.append(table);
      }
    } catch (err) {
      section.append(this.errorBanner(describe(err), () => void this.openList()));
    }
    this.host.append(section, this.createForm());
  }

  private errorBanner(message: string, retry: () => void): HTMLElement {
    const button = h('button', { class: 'retry', type: 'button' }, 'retry');
    button.addEventListener('click', retry);
    return h('div', { class: 'banner banner-error' }, h('span', {}, message), button);
  }

  private createForm(): HTMLElement {
    const form = h('form', { class: 'create-run' }, h('h2', {}, 'new run'));
    const inputs = new Map<string, HTMLInputElement>();
    for (const spec of FORM_FIELDS) {
      const input = h('input', {
        type: 'text',
        name: spec.key,
        placeholder: spec.placeholder,
        'data-field': spec.key,
      }) as HTMLInputElement;
      inputs.set(spec.key, input);
      form.append(
        h('div', { class: 'form-row' },
          h('label', {}, spec.label, input),
          h('span', { class: 'field-error', 'data-error-for': spec.key }),
        ),
      );
    }
    const status = h('div', { class: 'form-error' });
    const submit = h('button', { type: 'submit' }, 'create run');
    form.append(h('div', { class: 'form-row' }, submit), status);

    form.addEventListener('submit', (ev) => {
      ev.preventDefault();
      void this.submitForm(form, inputs, status);
    });
    return form;
  }

  private async submitForm(
    form: HTMLFormElement,
    inputs: Map<string, HTMLInputElement>,
    status: HTMLElement,
  ): Promise<void> {
    const values: FormValues = {};
    for (const [key, input] of inputs) values[key] = input.value;
    const errors = validateForm(values);
    for (const [key] of inputs) {
      const slot = form.querySelector(`[data-error-for="${key}"]`);
      if (slot) slot.textContent = errors[key] ?? '';
    }
    status.textContent = '';
    if (Object.keys(errors).length) return;

    try {
      const created = await this.api.createRun(collectOverrides(values) ?? undefined);
      window.location.hash = `#/runs/${created.run_id}`;
      await this.openRun(created.run_id);
    } catch (err) {
      if (err instanceof ServiceError) {
        status.textContent = describe(err);
      } else {
        clear(status);
        status.append(this.errorBanner(describe(err), () => {
          void this.submitForm(form, inputs, status);
        }));
      }
    }
  }
}

class RunPage {
  private state: RunStatePayload | null = null;
  private criterion: CriterionPayload | null = null;
  private ranked: RankedRow[] | null = null;
  private dist: DistributionPayload | null = null;
  private rejected: CandidateRow[] | null = null;
  private rejectedLoading = false;
  private visible = new Set<string>();
  private rejectedOpen = false;
  private banner: string | null = null;
  private readonly poller: Poller;

  constructor(
    private readonly host: HTMLElement,
    private readonly api: ApiClient,
    readonly runId: string,
    pollMs: number,
  ) {
    this.poller = new Poller(() => this.refresh(), pollMs);
  }

  open(): Promise<void> {
    return this.refresh();
  }

  dispose(): void {
    this.poller.stop();
  }

  /** One poll tick: pull state, pull any newly finished artifacts, render. */
  async refresh(): Promise<void> {
    try {
      this.state = await this.api.getRun(this.runId);
      await this.loadArtifacts();
      this.banner = null;
    } catch (err) {
      this.banner = describe(err);
    }
    this.render();
    if (this.state && anyRunning(this.state.stages)) this.poller.start();
    else this.poller.stop();
  }

  private async loadArtifacts(): Promise<void> {
    const stages = this.state!.stages;
    if (stages['1'] === 'done' && !this.criterion) {
      this.criterion = await this.api.criterion(this.runId);
    }
    if (stages['3'] === 'done' && !this.ranked) {
      this.ranked = await this.api.stableCandidates(this.runId);
    }
    if (stages['3'] === 'done' && !this.dist) {
      this.dist = await this.api.distribution(this.runId);
      this.visible = new Set(Object.keys(this.dist.series));
    }
  }

  private async launch(stage: number): Promise<void> {
    try {
      await this.api.startStage(this.runId, stage);
    } catch (err) {
      this.banner = describe(err);
      this.render();
      return;
    }
    await this.refresh();
  }

  private render(): void {
    clear(this.host);
    const page = h('section', { class: 'run-page' });
    page.append(
      h('p', {}, h('a', { href: '#/' }, 'all runs')),
      h('h2', {}, this.runId),
    );
    if (this.banner) {
      const retry = h('button', { class: 'retry', type: 'button' }, 'retry');
      retry.addEventListener('click', () => void this.refresh());
      page.append(h('div', { class: 'banner banner-error' }, h('span', {}, this.banner), retry));
    }
    if (this.state) {
      for (const n of STAGES) page.append(this.stageCard(n));
    }
    this.host.append(page);
  }

  private stageCard(stage: number): HTMLElement {
    const state = this.state!;
    const status = state.stages[String(stage)] ?? 'pending';
    const eligible = nextEligibleStage(state.stages) === stage;

    const button = h('button', {
      class: 'run-stage',
      type: 'button',
      'data-stage': String(stage),
      disabled: !eligible,
    }, status === 'failed' ? `retry stage ${stage}` : `run stage ${stage}`);
    button.addEventListener('click', () => void this.launch(stage));

    const card = h('section', { class: `stage stage-${status}`, 'data-stage': String(stage) },
      h('header', { class: 'stage-header' },
        h('h3', {}, `stage ${stage} · ${STAGE_TITLES[stage]}`),
        badge(status),
        button,
      ),
      h('p', { class: 'stage-summary' }, STAGE_SUMMARIES[stage] ?? ''),
    );

    const failure = state.failures[String(stage)];
    if (status === 'failed' && failure) {
      card.append(h('div', { class: 'diagnostics' }, h('h4', {}, 'diagnostics'), h('pre', {}, failure)));
    }
    if (status === 'done') {
      card.append(this.counts(stage));
      if (stage === 1 && this.criterion) card.append(this.criterionCard(this.criterion));
      if (stage === 2) card.append(this.artifactList(stage));
      if (stage === 3) {
        if (this.ranked) card.append(this.candidateTable(this.ranked));
        card.append(this.rejectedSection());
        card.append(this.distributionSection());
      }
    }
    return card;
  }

  private counts(stage: number): HTMLElement {
    const counts = this.state!.counts;
    const dl = h('dl', { class: 'counts' });
    for (const key of STAGE_COUNT_KEYS[stage] ?? []) {
      if (!(key in counts)) continue;
      dl.append(h('dt', {}, countLabel(key)), h('dd', {}, String(counts[key])));
    }
    return dl;
  }

  private criterionCard(criterion: CriterionPayload): HTMLElement {
    const provenance = criterion.provenance;
    const records = provenance['record_count'];
    const note = records === undefined ? '' : `derived from ${records} extracted records`;
    return h('div', { class: 'criterion-card' },
      h('h4', {}, 'screening criterion'),
      h('p', { class: 'criterion' }, criterionLabel(criterion)),
      h('p', { class: 'criterion-note' }, note),
    );
  }

  private artifactList(stage: number): HTMLElement {
    const names = this.state!.artifacts[`stage${stage}`] ?? [];
    const list = h('ul', { class: 'artifacts' });
    for (const name of names) list.append(h('li', {}, h('code', {}, name)));
    return h('div', {}, h('h4', {}, 'artifacts'), list);
  }

  private candidateTable(rows: RankedRow[]): HTMLElement {
    const table = h('table', { class: 'candidates' });
    table.append(
      h('tr', {},
        h('th', {}, '#'),
        h('th', {}, 'formula'),
        h('th', {}, 'predicted Θ_D (K)'),
        h('th', {}, 'E_form (eV/atom)'),
        h('th', {}, 'E_hull (eV/atom)'),
        h('th', {}, 'structure'),
      ),
    );
    rows.forEach((row, i) => {
      table.append(
        h('tr', { 'data-candidate': row.id },
          h('td', {}, String(i + 1)),
          h('td', {}, row.formula),
          h('td', { class: 'num' }, fmtFixed(row.predicted_theta_d, 1)),
          h('td', { class: 'num' }, fmtFixed(row.e_form, 3)),
          h('td', { class: 'num' }, fmtFixed(row.e_hull, 3)),
          h('td', {}, h('a', { href: this.api.cifUrl(this.runId, row.id), target: '_blank' }, 'CIF')),
        ),
      );
    });
    const caption = rows.length
      ? `${rows.length} stable candidates, best first`
      : 'no candidates satisfied the criterion and stability threshold';
    return h('div', {}, h('h4', {}, 'stable candidates'), h('p', {}, caption), table);
  }

  private rejectedSection(): HTMLElement {
    const details = h('details', { class: 'rejected', open: this.rejectedOpen }) as HTMLDetailsElement;
    details.append(h('summary', {}, 'rejected candidates'));
    if (this.rejected) {
      const table = h('table', { class: 'rejected-table' });
      table.append(h('tr', {}, h('th', {}, 'id'), h('th', {}, 'formula'), h('th', {}, 'reason')));
      for (const row of this.rejected) {
        table.append(h('tr', {}, h('td', {}, row.id), h('td', {}, row.formula), h('td', {}, row.reason ?? '')));
      }
      details.append(table);
    }
    details.addEventListener('toggle', () => {
      this.rejectedOpen = details.open;
      // toggle can fire twice for one open; fetch the rows only once
      if (details.open && !this.rejected && !this.rejectedLoading) {
        this.rejectedLoading = true;
        void this.api.candidates(this.runId, 'rejected').then((rows) => {
          this.rejected = rows;
          this.rejectedLoading = false;
          this.render();
        });
      }
    });
    return details;
  }

  private distributionSection(): HTMLElement {
    const wrap = h('div', { class: 'distribution' }, h('h4', {}, 'property distribution'));
    if (!this.dist) {
      wrap.append(h('p', { class: 'notice' }, 'distribution not ready'));
      return wrap;
    }
    const criterion = this.criterion;
    wrap.append(
      buildDistributionPanel(this.dist, this.visible, {
        axisLabel: criterion ? `${propertySymbol(criterion.property_name)} (${criterion.unit})` : undefined,
        thresholdLabel: criterion ? criterionLabel(criterion) : undefined,
        onToggle: (name, visible) => {
          // re-render from the cached payload; toggling never refetches
          if (visible) this.visible.add(name);
          else this.visible.delete(name);
          this.render();
        },
      }),
    );
    return wrap;
  }
}
