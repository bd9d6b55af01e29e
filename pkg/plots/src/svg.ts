// Minimal deterministic SVG builder: pure string assembly, fixed styling,
// no timestamps or randomness, so identical inputs give identical bytes.

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { left: 64, right: 24, top: 28, bottom: 48 };

export function fmt(x: number): string {
    if (!Number.isFinite(x)) return "0";
    const s = x.toPrecision(6);
    return s.includes(".") || s.includes("e")
        ? s.replace(/\.?0+(e|$)/, "$1")
        : s;
}

export interface Scale {
    (x: number): number;
    domain: [number, number];
    ticks: number[];
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
    if (!(hi > lo)) return [lo];
    const span = hi - lo;
    const step = Math.pow(10, Math.floor(Math.log10(span / n)));
    const err = span / n / step;
    const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
    const s = step * mult;
    const ticks: number[] = [];
    for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * span; v += s) {
        ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
    }
    return ticks;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
    const [d0, d1] = domain;
    const [r0, r1] = range;
    const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
    const f = ((x: number) => r0 + (x - d0) * k) as Scale;
    f.domain = domain;
    f.ticks = niceTicks(d0, d1);
    return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
    const lo = Math.log10(domain[0]);
    const hi = Math.log10(domain[1]);
    const lin = linearScale([lo, hi], range);
    const f = ((x: number) => lin(Math.log10(x))) as Scale;
    f.domain = domain;
    const ticks: number[] = [];
    for (let p = Math.ceil(lo); p <= Math.floor(hi); p++) ticks.push(Math.pow(10, p));
    f.ticks = ticks.length >= 2 ? ticks : [domain[0], domain[1]];
    return f;
}

// compact viridis-like ramp, interpolated in RGB
const RAMP: [number, number, number][] = [
    [68, 1, 84], [72, 36, 117], [65, 68, 135], [52, 95, 141],
    [41, 120, 142], [32, 144, 141], [34, 168, 132], [68, 191, 112],
    [122, 209, 81], [189, 223, 38], [253, 231, 37],
];

export function colormap(t: number): string {
    const x = Math.max(0, Math.min(1, t)) * (RAMP.length - 1);
    const i = Math.min(Math.floor(x), RAMP.length - 2);
    const f = x - i;
    const c = RAMP[i].map((a, k) => Math.round(a + f * (RAMP[i + 1][k] - a)));
    return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export const PHASE_COLORS: Record<string, string> = {
    I: "#4477aa",
    II: "#ccbb44",
    III: "#ee6677",
    unstable: "#bbbbbb",
};

export class Svg {
    private parts: string[] = [];

    constructor(width = WIDTH, height = HEIGHT) {
        this.parts.push(
            `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
            `viewBox="0 0 ${width} ${height}" font-family="Helvetica,Arial,sans-serif">`,
            `<rect width="${width}" height="${height}" fill="white"/>`,
        );
    }

    rect(x: number, y: number, w: number, h: number, fill: string): void {
        this.parts.push(
            `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
        );
    }

    circle(x: number, y: number, r: number, fill: string): void {
        this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
    }

    path(points: [number, number][], stroke: string, dashed = false, width = 1.5): void {
        if (points.length === 0) return;
        const d = points
            .map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)} ${fmt(y)}`)
            .join(" ");
        const dash = dashed ? ` stroke-dasharray="6 4"` : "";
        this.parts.push(
            `<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dash}/>`,
        );
    }

    text(x: number, y: number, s: string, anchor = "middle", size = 12, rotate = 0): void {
        const tr = rotate ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
        this.parts.push(
            `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}"${tr}>${escapeXml(s)}</text>`,
        );
    }

    axes(xs: Scale, ys: Scale, xlabel: string, ylabel: string, logY = false): void {
        const x0 = MARGIN.left;
        const x1 = WIDTH - MARGIN.right;
        const y0 = HEIGHT - MARGIN.bottom;
        const y1 = MARGIN.top;
        this.path([[x0, y0], [x1, y0]], "#000000", false, 1);
        this.path([[x0, y0], [x0, y1]], "#000000", false, 1);
        for (const t of xs.ticks) {
            const px = xs(t);
            this.path([[px, y0], [px, y0 + 5]], "#000000", false, 1);
            this.text(px, y0 + 18, fmt(t), "middle", 11);
        }
        for (const t of ys.ticks) {
            const py = ys(t);
            this.path([[x0 - 5, py], [x0, py]], "#000000", false, 1);
            this.text(x0 - 8, py + 4, logY ? `1e${fmt(Math.log10(t))}` : fmt(t), "end", 11);
        }
        this.text((x0 + x1) / 2, HEIGHT - 10, xlabel, "middle", 13);
        this.text(16, (y0 + y1) / 2, ylabel, "middle", 13, -90);
    }

    render(): string {
        return this.parts.join("\n") + "\n</svg>\n";
    }
}

function escapeXml(s: string): string {
    return s
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}

export function plotArea(): { x: [number, number]; y: [number, number] } {
    return {
        x: [MARGIN.left, WIDTH - MARGIN.right],
        y: [HEIGHT - MARGIN.bottom, MARGIN.top],
    };
}
