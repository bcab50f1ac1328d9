// End-to-end against the real backend: spawn the rating service, read the
// served thresholds, and make sure a slider value survives the round trip
// into the session export untouched.
import { ChildProcess, execFileSync, spawn } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ServiceClient, ServiceError } from '../src/api.js';
import { gradeLabel } from '../src/grades.js';

const REPO_SRC = resolve(fileURLToPath(new URL('.', import.meta.url)), '..', '..', 'src');
const PY_ENV = { ...process.env, PYTHONPATH: REPO_SRC };
const PORT = 8900 + (process.pid % 100);
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER_SCRIPT = `
import sys
import numpy as np
import uvicorn
from valmetric.series import make_pair
from valmetric.service import RatingStore, create_app

store = RatingStore(sys.argv[1])
t = np.arange(64) / 64
pairs = []
for i in range(5):
    y = 0.5 + 0.35 * np.sin(2 * np.pi * (i + 1) * t)
    pairs.append((f"ap{i}", make_pair(t, y + 0.02 * (i + 1), y)))
store.create_session(pairs)
uvicorn.run(create_app(store), host="127.0.0.1", port=int(sys.argv[2]), log_level="error")
`;

let server: ChildProcess;
const client = new ServiceClient(BASE);

async function waitForServer(): Promise<void> {
    for (let i = 0; i < 100; i++) {
        try {
            await client.sessions();
            return;
        } catch {
            await new Promise((r) => setTimeout(r, 200));
        }
    }
    throw new Error(`service did not come up on ${BASE}`);
}

beforeAll(async () => {
    const storeDir = mkdtempSync(join(tmpdir(), 'rating-store-'));
    server = spawn('python3', ['-c', SERVER_SCRIPT, storeDir, String(PORT)], {
        env: PY_ENV,
        stdio: ['ignore', 'inherit', 'inherit'],
    });
    await waitForServer();
}, 60_000);

afterAll(() => {
    server?.kill('SIGTERM');
});

describe('against the live service', () => {
    it('maps the boundary slider values with the served thresholds', async () => {
        const detail = await client.session('session-0001');
        expect(detail.thresholds).toEqual([...detail.thresholds].sort((a, b) => a - b));

        const values = [0.58, 0.59, 0.8, 0.81, 0.94, 0.95];
        const fromUi = values.map((v) => gradeLabel(v, detail.thresholds, detail.legend));

        // same fixture through the backend's own grading code
        const oracle = JSON.parse(
            execFileSync(
                'python3',
                [
                    '-c',
                    'import json, sys\n' +
                        'from valmetric.metrics import grade\n' +
                        'print(json.dumps([grade(v)[1] for v in json.loads(sys.argv[1])]))',
                    JSON.stringify(values),
                ],
                { env: PY_ENV, encoding: 'utf8' },
            ),
        );

        expect(fromUi).toEqual(['Poor', 'Fair', 'Fair', 'Good', 'Good', 'Excellent']);
        expect(fromUi).toEqual(oracle);
    });

    it('keeps a submitted slider value verbatim in the export', async () => {
        await client.submitRating('ap0', { expert_id: 'expert01', rating: 0.73 });
        await client.submitRating('ap1', {
            expert_id: 'expert01',
            rating: 0.555,
            annotation: 'dragged between steps',
        });

        const csv = await client.exportCsv('session-0001');
        const lines = csv.split(/\r?\n/);
        expect(lines[0]).toBe('pair_id,expert_id,rating');
        expect(lines).toContain('ap0,expert01,0.73');
        expect(lines).toContain('ap1,expert01,0.555');
    });

    it('propagates the backend rejection of an out-of-range rating', async () => {
        const attempt = client.submitRating('ap0', { expert_id: 'expert01', rating: 1.2 });
        await expect(attempt).rejects.toThrowError(ServiceError);
        await expect(attempt).rejects.toMatchObject({ status: 422 });
    });

    it('serves pair data with aligned channels', async () => {
        const data = await client.pairData('ap3');
        expect(data.t.length).toBe(64);
        expect(data.measurement.length).toBe(64);
        expect(data.simulation.length).toBe(64);
        expect(data.t[0]).toBe(0);
    });
});
