import { LegendRow } from './api.js';

// worst band to best; boundaries themselves come from the service
export const BAND_COLORS = ['#d7191c', '#fdae61', '#a6d96a', '#1a9641'];

export function clamp01(value: number): number {
    return Math.min(1, Math.max(0, value));
}

/**
 * Band index of a rating, 0 = worst. A value sitting exactly on a
 * threshold keeps the lower band.
 */
export function gradeIndex(value: number, thresholds: readonly number[]): number {
    let index = 0;
    for (const t of thresholds) {
        if (value > t) index += 1;
    }
    return index;
}

/** Legend rows use rank 1 for the best grade; band indices count up from worst. */
export function labelFor(index: number, legend: readonly LegendRow[]): string {
    const worstFirst = [...legend].sort((a, b) => b.rank - a.rank);
    const row = worstFirst[index];
    if (!row) throw new Error(`no legend row for band ${index}`);
    return row.label;
}

export function gradeLabel(
    value: number,
    thresholds: readonly number[],
    legend: readonly LegendRow[],
): string {
    return labelFor(gradeIndex(value, thresholds), legend);
}

export interface ColorBand {
    from: number;
    to: number;
    color: string;
}

/** Contiguous colorbar bands over [0, 1], split at the served thresholds. */
export function colorBands(thresholds: readonly number[]): ColorBand[] {
    const edges = [0, ...thresholds, 1];
    const bands: ColorBand[] = [];
    for (let i = 0; i + 1 < edges.length; i++) {
        bands.push({
            from: edges[i],
            to: edges[i + 1],
            color: BAND_COLORS[Math.min(i, BAND_COLORS.length - 1)],
        });
    }
    return bands;
}

/** CSS gradient with hard stops at the band boundaries. */
export function colorbarGradient(thresholds: readonly number[]): string {
    const stops = colorBands(thresholds)
        .map(
            (b) =>
                `${b.color} ${(b.from * 100).toFixed(2)}%, ` +
                `${b.color} ${(b.to * 100).toFixed(2)}%`,
        )
        .join(', ');
    return `linear-gradient(to right, ${stops})`;
}
