import { describe, expect, it } from 'vitest';

import { LegendRow } from '../src/api.js';
import {
    BAND_COLORS,
    clamp01,
    colorBands,
    colorbarGradient,
    gradeIndex,
    gradeLabel,
    labelFor,
} from '../src/grades.js';

// same shape the service returns, rank 1 = best
const LEGEND: LegendRow[] = [
    { rank: 1, label: 'Excellent', criterion: 'R > 0.94' },
    { rank: 2, label: 'Good', criterion: '0.8 < R <= 0.94' },
    { rank: 3, label: 'Fair', criterion: '0.58 < R <= 0.8' },
    { rank: 4, label: 'Poor', criterion: 'R <= 0.58' },
];
const THRESHOLDS = [0.58, 0.8, 0.94];

describe('gradeLabel', () => {
    it('keeps the lower grade exactly on a boundary', () => {
        const got = [0.58, 0.59, 0.8, 0.81, 0.94, 0.95].map((v) =>
            gradeLabel(v, THRESHOLDS, LEGEND),
        );
        expect(got).toEqual(['Poor', 'Fair', 'Fair', 'Good', 'Good', 'Excellent']);
    });

    it('covers the extremes', () => {
        expect(gradeLabel(0, THRESHOLDS, LEGEND)).toBe('Poor');
        expect(gradeLabel(1, THRESHOLDS, LEGEND)).toBe('Excellent');
    });

    it('is monotone in the rating', () => {
        let last = -1;
        for (let v = 0; v <= 1.0001; v += 0.005) {
            const index = gradeIndex(v, THRESHOLDS);
            expect(index).toBeGreaterThanOrEqual(last);
            last = index;
        }
    });

    it('does not depend on legend row order', () => {
        const shuffled = [LEGEND[2], LEGEND[0], LEGEND[3], LEGEND[1]];
        expect(gradeLabel(0.95, THRESHOLDS, shuffled)).toBe('Excellent');
        expect(gradeLabel(0.1, THRESHOLDS, shuffled)).toBe('Poor');
    });

    it('rejects a band with no legend row', () => {
        expect(() => labelFor(4, LEGEND)).toThrow(/no legend row/);
    });
});

describe('clamp01', () => {
    it('pins values into [0, 1]', () => {
        expect(clamp01(-0.2)).toBe(0);
        expect(clamp01(1.7)).toBe(1);
        expect(clamp01(0.42)).toBe(0.42);
    });
});

describe('colorBands', () => {
    it('tiles [0, 1] contiguously with one color per band', () => {
        const bands = colorBands(THRESHOLDS);
        expect(bands).toHaveLength(4);
        expect(bands[0].from).toBe(0);
        expect(bands[bands.length - 1].to).toBe(1);
        for (let i = 0; i + 1 < bands.length; i++) {
            expect(bands[i].to).toBe(bands[i + 1].from);
        }
        expect(bands.map((b) => b.color)).toEqual(BAND_COLORS);
    });

    it('puts hard stops at the served boundaries', () => {
        const css = colorbarGradient(THRESHOLDS);
        expect(css).toContain('58.00%');
        expect(css).toContain('80.00%');
        expect(css).toContain('94.00%');
        expect(css.startsWith('linear-gradient(to right, ')).toBe(true);
    });
});
