import { PairData } from './api.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface Extent {
    min: number;
    max: number;
}

export function extent(values: readonly number[]): Extent {
    let min = Infinity;
    let max = -Infinity;
    for (const v of values) {
        if (v < min) min = v;
        if (v > max) max = v;
    }
    if (min === max) {
        // degenerate span: pad so the flat line sits mid-chart
        min -= 0.5;
        max += 0.5;
    }
    return { min, max };
}

/** SVG path for one series, mapped into a width x height viewport. */
export function pathData(
    t: readonly number[],
    values: readonly number[],
    xExtent: Extent,
    yExtent: Extent,
    width: number,
    height: number,
): string {
    const xSpan = xExtent.max - xExtent.min;
    const ySpan = yExtent.max - yExtent.min;
    const parts: string[] = [];
    for (let i = 0; i < t.length; i++) {
        const x = ((t[i] - xExtent.min) / xSpan) * width;
        const y = height - ((values[i] - yExtent.min) / ySpan) * height;
        parts.push(`${i === 0 ? 'M' : 'L'}${x.toFixed(2)} ${y.toFixed(2)}`);
    }
    return parts.join(' ');
}

export class OverlayChart {
    constructor(
        private width = 720,
        private height = 320,
    ) {}

    /** Both series on shared axes; measurement solid, simulation dashed. */
    render(data: PairData): SVGSVGElement {
        const xExtent = extent(data.t);
        const yExtent = extent([...data.measurement, ...data.simulation]);

        const svg = document.createElementNS(SVG_NS, 'svg');
        svg.setAttribute('viewBox', `0 0 ${this.width} ${this.height}`);
        svg.setAttribute('class', 'overlay-chart');
        svg.setAttribute('role', 'img');

        const series: Array<[string, readonly number[]]> = [
            ['measurement', data.measurement],
            ['simulation', data.simulation],
        ];
        for (const [name, values] of series) {
            const path = document.createElementNS(SVG_NS, 'path');
            path.setAttribute(
                'd',
                pathData(data.t, values, xExtent, yExtent, this.width, this.height),
            );
            path.setAttribute('class', `series series-${name}`);
            path.setAttribute('fill', 'none');
            svg.appendChild(path);
        }
        return svg;
    }
}
