import { clamp01 } from './grades.js';

export type SubmissionStatus = 'unrated' | 'submitting' | 'submitted';

/**
 * View state for one rating campaign: which pair is on screen, the slider
 * position, and what has been submitted. At most one submission may be in
 * flight; a failed submission rolls the pair back to unrated so it can be
 * retried.
 */
export class RatingViewState {
    index = 0;
    sliderValue = 0.5;
    expertId = '';
    lastError: string | null = null;

    private status = new Map<string, SubmissionStatus>();
    private inFlight: string | null = null;

    constructor(readonly pairIds: readonly string[]) {
        if (pairIds.length === 0) throw new Error('session has no pairs');
        for (const id of pairIds) this.status.set(id, 'unrated');
    }

    get currentPairId(): string {
        return this.pairIds[this.index];
    }

    statusOf(pairId: string): SubmissionStatus {
        const s = this.status.get(pairId);
        if (s === undefined) throw new Error(`unknown pair ${pairId}`);
        return s;
    }

    get submittedCount(): number {
        let n = 0;
        for (const s of this.status.values()) if (s === 'submitted') n += 1;
        return n;
    }

    get done(): boolean {
        return this.submittedCount === this.pairIds.length;
    }

    setSlider(value: number): void {
        this.sliderValue = clamp01(value);
    }

    canSubmit(): boolean {
        return this.expertId.trim() !== '' && this.inFlight === null;
    }

    beginSubmission(): string {
        if (this.inFlight !== null) {
            throw new Error(`submission for ${this.inFlight} still in flight`);
        }
        const pairId = this.currentPairId;
        this.inFlight = pairId;
        this.status.set(pairId, 'submitting');
        this.lastError = null;
        return pairId;
    }

    completeSubmission(pairId: string): void {
        this.status.set(pairId, 'submitted');
        this.inFlight = null;
        this.advanceToNextUnrated();
    }

    failSubmission(pairId: string, message: string): void {
        this.status.set(pairId, 'unrated');
        this.inFlight = null;
        this.lastError = message;
    }

    /** Move forward to the next unrated pair, wrapping around once. */
    advanceToNextUnrated(): void {
        const n = this.pairIds.length;
        for (let step = 1; step <= n; step++) {
            const i = (this.index + step) % n;
            if (this.status.get(this.pairIds[i]) !== 'submitted') {
                this.index = i;
                return;
            }
        }
        // everything rated: stay put
    }
}
