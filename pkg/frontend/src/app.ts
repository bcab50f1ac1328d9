import { PairData, RatingServiceApi, SessionDetail } from './api.js';
import { OverlayChart } from './chart.js';
import { colorbarGradient, gradeLabel } from './grades.js';
import { RatingViewState } from './state.js';

/**
 * One-pair-at-a-time rating screen: legend on top, measurement/simulation
 * overlay in the middle, colorbar with the rating slider below. Thresholds
 * and grade labels come from the session payload, never from this file.
 */
export class RatingApp {
    private state!: RatingViewState;
    private session!: SessionDetail;
    private chart = new OverlayChart();

    private chartHost!: HTMLElement;
    private errorPanel!: HTMLElement;
    private progress!: HTMLElement;
    private badge!: HTMLElement;
    private slider!: HTMLInputElement;
    private expertInput!: HTMLInputElement;
    private annotationInput!: HTMLInputElement;
    private submitButton!: HTMLButtonElement;

    constructor(
        private root: HTMLElement,
        private client: RatingServiceApi,
        private sessionId?: string,
    ) {}

    async start(): Promise<void> {
        try {
            if (!this.sessionId) {
                const sessions = await this.client.sessions();
                if (sessions.length === 0) {
                    this.root.textContent = 'No rating sessions on the server.';
                    return;
                }
                this.sessionId = sessions[sessions.length - 1].session_id;
            }
            this.session = await this.client.session(this.sessionId);
        } catch (err) {
            this.root.textContent = `Could not load session: ${messageOf(err)}`;
            return;
        }
        this.state = new RatingViewState(this.session.pairs);
        this.buildSkeleton();
        await this.loadCurrentPair();
    }

    private buildSkeleton(): void {
        this.root.textContent = '';

        const legend = document.createElement('table');
        legend.className = 'legend';
        const head = legend.insertRow();
        for (const title of ['Grade', 'Criterion']) {
            const th = document.createElement('th');
            th.textContent = title;
            head.appendChild(th);
        }
        for (const row of this.session.legend) {
            const tr = legend.insertRow();
            tr.insertCell().textContent = row.label;
            tr.insertCell().textContent = row.criterion;
        }
        this.root.appendChild(legend);

        this.progress = el('div', 'progress');
        this.root.appendChild(this.progress);

        this.chartHost = el('div', 'chart-host');
        this.root.appendChild(this.chartHost);

        this.errorPanel = el('div', 'error-panel');
        this.errorPanel.hidden = true;
        this.root.appendChild(this.errorPanel);

        const bar = el('div', 'colorbar');
        bar.style.background = colorbarGradient(this.session.thresholds);
        this.root.appendChild(bar);

        this.slider = document.createElement('input');
        this.slider.type = 'range';
        this.slider.min = '0';
        this.slider.max = '1';
        this.slider.step = '0.01';
        this.slider.value = String(this.state.sliderValue);
        this.slider.className = 'rating-slider';
        this.slider.addEventListener('input', () => {
            this.state.setSlider(Number(this.slider.value));
            this.refreshControls();
        });
        this.root.appendChild(this.slider);

        this.badge = el('span', 'grade-badge');
        this.root.appendChild(this.badge);

        this.expertInput = document.createElement('input');
        this.expertInput.type = 'text';
        this.expertInput.placeholder = 'expert id';
        this.expertInput.className = 'expert-id';
        this.expertInput.addEventListener('input', () => {
            this.state.expertId = this.expertInput.value;
            this.refreshControls();
        });
        this.root.appendChild(this.expertInput);

        this.annotationInput = document.createElement('input');
        this.annotationInput.type = 'text';
        this.annotationInput.placeholder = 'annotation (optional)';
        this.annotationInput.className = 'annotation';
        this.root.appendChild(this.annotationInput);

        this.submitButton = document.createElement('button');
        this.submitButton.textContent = 'Submit rating';
        this.submitButton.className = 'submit';
        this.submitButton.addEventListener('click', () => void this.submit());
        this.root.appendChild(this.submitButton);

        this.refreshControls();
    }

    private async loadCurrentPair(): Promise<void> {
        this.chartHost.textContent = '';
        this.hideError();
        let data: PairData;
        try {
            data = await this.client.pairData(this.state.currentPairId);
        } catch (err) {
            this.showError(messageOf(err), () => void this.loadCurrentPair());
            return;
        }
        if (data.simulation.length === 0 || data.measurement.length === 0) {
            this.showError(`pair ${data.pair_id} has an empty channel`);
            return;
        }
        this.chartHost.appendChild(this.chart.render(data));
        this.refreshControls();
    }

    private async submit(): Promise<void> {
        if (!this.state.canSubmit()) return;
        const pairId = this.state.beginSubmission();
        this.refreshControls();
        try {
            await this.client.submitRating(pairId, {
                expert_id: this.state.expertId.trim(),
                rating: this.state.sliderValue,
                annotation: this.annotationInput.value || undefined,
            });
        } catch (err) {
            this.state.failSubmission(pairId, messageOf(err));
            this.showError(this.state.lastError ?? 'submission failed');
            this.refreshControls();
            return;
        }
        this.state.completeSubmission(pairId);
        if (this.state.done) {
            this.chartHost.textContent = '';
            this.progress.textContent = `All ${this.state.pairIds.length} pairs rated. Thank you.`;
            this.refreshControls();
            return;
        }
        await this.loadCurrentPair();
    }

    /** Badge, progress line and submit availability; called on every change. */
    private refreshControls(): void {
        this.badge.textContent = gradeLabel(
            this.state.sliderValue,
            this.session.thresholds,
            this.session.legend,
        );
        if (!this.state.done) {
            this.progress.textContent =
                `Pair ${this.state.index + 1} of ${this.state.pairIds.length}` +
                ` (${this.state.submittedCount} rated): ${this.state.currentPairId}`;
        }
        const chartVisible = this.chartHost.childElementCount > 0;
        this.submitButton.disabled =
            !this.state.canSubmit() || !chartVisible || this.state.done;
    }

    private showError(message: string, retry?: () => void): void {
        this.errorPanel.textContent = message;
        if (retry) {
            const button = document.createElement('button');
            button.textContent = 'Retry';
            button.className = 'retry';
            button.addEventListener('click', retry);
            this.errorPanel.appendChild(button);
        }
        this.errorPanel.hidden = false;
        this.refreshControls();
    }

    private hideError(): void {
        this.errorPanel.hidden = true;
        this.errorPanel.textContent = '';
    }
}

function el(tag: string, className: string): HTMLElement {
    const node = document.createElement(tag);
    node.className = className;
    return node;
}

function messageOf(err: unknown): string {
    return err instanceof Error ? err.message : String(err);
}
