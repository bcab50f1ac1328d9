export interface LegendRow {
    rank: number;
    label: string;
    criterion: string;
}

export interface SessionSummary {
    session_id: string;
    created_at: string;
    n_pairs: number;
    n_ratings: number;
}

export interface SessionDetail {
    session_id: string;
    created_at: string;
    pairs: string[];
    legend: LegendRow[];
    thresholds: number[];
}

export interface PairData {
    pair_id: string;
    t: number[];
    measurement: number[];
    simulation: number[];
}

export interface RatingSubmission {
    expert_id: string;
    rating: number;
    annotation?: string;
}

export class ServiceError extends Error {
    constructor(public status: number, detail: string) {
        super(detail);
        this.name = 'ServiceError';
    }
}

/** Extract FastAPI's error payload so the UI can show it verbatim. */
async function errorDetail(resp: Response): Promise<string> {
    const text = await resp.text();
    try {
        const body = JSON.parse(text);
        if (typeof body.detail === 'string') return body.detail;
        if (body.detail !== undefined) return JSON.stringify(body.detail);
    } catch {
        // not JSON, fall through to the raw text
    }
    return text || `HTTP ${resp.status}`;
}

/** What the UI needs from the backend; ServiceClient is the real thing. */
export interface RatingServiceApi {
    sessions(): Promise<SessionSummary[]>;
    session(sessionId: string): Promise<SessionDetail>;
    pairData(pairId: string): Promise<PairData>;
    submitRating(
        pairId: string,
        submission: RatingSubmission,
    ): Promise<{ record_id: string }>;
    exportCsv(sessionId: string): Promise<string>;
}

export class ServiceClient implements RatingServiceApi {
    constructor(private baseUrl = '') {}

    private async request(path: string, init?: RequestInit): Promise<Response> {
        const resp = await fetch(this.baseUrl + path, init);
        if (!resp.ok) {
            throw new ServiceError(resp.status, await errorDetail(resp));
        }
        return resp;
    }

    async sessions(): Promise<SessionSummary[]> {
        return (await this.request('/api/sessions')).json();
    }

    async session(sessionId: string): Promise<SessionDetail> {
        return (await this.request(`/api/sessions/${sessionId}`)).json();
    }

    async pairData(pairId: string): Promise<PairData> {
        return (await this.request(`/api/pairs/${pairId}/data`)).json();
    }

    async submitRating(
        pairId: string,
        submission: RatingSubmission,
    ): Promise<{ record_id: string }> {
        const resp = await this.request(`/api/pairs/${pairId}/ratings`, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(submission),
        });
        return resp.json();
    }

    async exportCsv(sessionId: string): Promise<string> {
        return (await this.request(`/api/sessions/${sessionId}/export`)).text();
    }
}
