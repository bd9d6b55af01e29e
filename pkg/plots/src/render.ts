// Figure renderers, one per documented CSV schema.
//
// Heatmap            <- phase_diagram.csv  (delta, epsilon, phase, mean_density, max_fluct, outcome)
// Profile            <- trajectory.csv     (t, j, re_alpha, im_alpha, g_jj)
//                       + optional profiles.csv (j, epsilon_j, delta_j, psi_j) dashed overlay
// Waterfall          <- scan_profiles.csv  (epsilon, j, alpha_abs)
// CorrelationMatrix  <- greens_function.csv / normalized_correlations.csv (row, col, re, im)
// ScalingFit         <- scaling.csv        (n_sites, eps_critical, derivative, fit)

import { Table, column, rawColumn, distinct, requireColumns, SchemaError } from "./csv.js";
import {
    PHASE_COLORS,
    Svg,
    colormap,
    fmt,
    linearScale,
    logScale,
    plotArea,
} from "./svg.js";

export type FigureKind =
    | "heatmap"
    | "profile"
    | "waterfall"
    | "correlation_matrix"
    | "scaling_fit";

export interface FigureSpec {
    kind: FigureKind;
    /** value column for heatmaps: phase | mean_density | max_fluct */
    value?: string;
    title?: string;
}

export function renderFigure(spec: FigureSpec, tables: Table[]): string {
    switch (spec.kind) {
        case "heatmap":
            return renderHeatmap(tables[0], spec.value ?? "phase", spec.title);
        case "profile":
            return renderProfile(tables[0], tables[1], spec.title);
        case "waterfall":
            return renderWaterfall(tables[0], spec.title);
        case "correlation_matrix":
            return renderCorrelationMatrix(tables[0], spec.title);
        case "scaling_fit":
            return renderScalingFit(tables[0], spec.title);
        default:
            throw new SchemaError(`unknown figure kind ${String(spec.kind)}`);
    }
}

function cellEdges(values: number[]): Map<number, [number, number]> {
    const vs = [...values].sort((a, b) => a - b);
    const edges = new Map<number, [number, number]>();
    for (let i = 0; i < vs.length; i++) {
        const lo = i === 0 ? vs[i] - (vs[1] !== undefined ? (vs[1] - vs[0]) / 2 : 0.5)
            : (vs[i - 1] + vs[i]) / 2;
        const hi = i === vs.length - 1
            ? vs[i] + (vs[i - 1] !== undefined ? (vs[i] - vs[i - 1]) / 2 : 0.5)
            : (vs[i] + vs[i + 1]) / 2;
        edges.set(vs[i], [lo, hi]);
    }
    return edges;
}

export function renderHeatmap(table: Table, value: string, title = ""): string {
    const deltas = column(table, "delta");
    const epsilons = column(table, "epsilon");
    const numeric = value !== "phase";
    const values = numeric ? column(table, value) : [];
    const phases = numeric ? [] : rawColumn(table, "phase");

    const dEdges = cellEdges(distinct(deltas));
    const eEdges = cellEdges(distinct(epsilons));
    const area = plotArea();
    const dLo = Math.min(...[...dEdges.values()].map((e) => e[0]));
    const dHi = Math.max(...[...dEdges.values()].map((e) => e[1]));
    const eLo = Math.min(...[...eEdges.values()].map((e) => e[0]));
    const eHi = Math.max(...[...eEdges.values()].map((e) => e[1]));
    const xs = linearScale([dLo, dHi], area.x);
    const ys = linearScale([eLo, eHi], area.y);

    let vmax = 1;
    if (numeric) {
        vmax = Math.max(...values.filter(Number.isFinite), 1e-12);
    }

    const svg = new Svg();
    for (let i = 0; i < deltas.length; i++) {
        const [dl, dh] = dEdges.get(deltas[i])!;
        const [el, eh] = eEdges.get(epsilons[i])!;
        const fill = numeric
            ? colormap(Number.isFinite(values[i]) ? values[i] / vmax : 0)
            : PHASE_COLORS[phases[i]] ?? "#222222";
        svg.rect(xs(dl), ys(eh), xs(dh) - xs(dl), ys(el) - ys(eh), fill);
    }
    svg.axes(xs, ys, "detuning / J", "drive / J");
    svg.text(320, 16, title || `phase diagram: ${value}`, "middle", 14);
    return svg.render();
}

export function renderProfile(trajectory: Table, profiles?: Table, title = ""): string {
    requireColumns(trajectory, ["t", "j", "re_alpha", "im_alpha", "g_jj"]);
    const t = column(trajectory, "t");
    const tFinal = Math.max(...t);
    const sites: number[] = [];
    const density: number[] = [];
    const fluct: number[] = [];
    for (let i = 0; i < t.length; i++) {
        if (t[i] === tFinal) {
            const row = trajectory.rows[i];
            sites.push(row[trajectory.columns.indexOf("j")]);
            const re = row[trajectory.columns.indexOf("re_alpha")];
            const im = row[trajectory.columns.indexOf("im_alpha")];
            density.push(re * re + im * im);
            fluct.push(row[trajectory.columns.indexOf("g_jj")]);
        }
    }
    const area = plotArea();
    const xs = linearScale([Math.min(...sites), Math.max(...sites)], area.x);
    const yMax = Math.max(...density, ...fluct, 1e-12);
    const ys = linearScale([0, 1.05 * yMax], area.y);

    const svg = new Svg();
    svg.axes(xs, ys, "site j", "steady-state value");
    svg.path(sites.map((j, i) => [xs(j), ys(density[i])]), "#ee7733");
    for (let i = 0; i < sites.length; i++) svg.circle(xs(sites[i]), ys(density[i]), 3, "#ee7733");
    svg.path(sites.map((j, i) => [xs(j), ys(fluct[i])]), "#4477aa");
    if (profiles) {
        const pj = column(profiles, "j");
        const eps = column(profiles, "epsilon_j");
        const del = column(profiles, "delta_j");
        const epsMax = Math.max(...eps, 1e-12);
        const delMax = Math.max(...del, 1e-12);
        // drive/detuning ramps rescaled onto the density axis, as dashed guides
        svg.path(pj.map((j, i) => [xs(j), ys((eps[i] / epsMax) * yMax)]), "#cc3311", true, 1);
        svg.path(pj.map((j, i) => [xs(j), ys((del[i] / delMax) * yMax)]), "#117733", true, 1);
    }
    svg.text(320, 16, title || `steady profile at t = ${fmt(tFinal)}`, "middle", 14);
    return svg.render();
}

export function renderWaterfall(table: Table, title = ""): string {
    const eps = column(table, "epsilon");
    const js = column(table, "j");
    const amp = column(table, "alpha_abs");
    const epsValues = distinct(eps);
    const area = plotArea();
    const xs = linearScale([Math.min(...js), Math.max(...js)], area.x);
    const aMax = Math.max(...amp, 1e-12);
    const offsetStep = 0.35 * aMax;
    const yTop = aMax + offsetStep * (epsValues.length - 1);
    const ys = linearScale([0, 1.05 * yTop], area.y);

    const svg = new Svg();
    svg.axes(xs, ys, "site j", "|alpha_j| (offset per drive)");
    epsValues.forEach((e, row) => {
        const pts: [number, number][] = [];
        for (let i = 0; i < eps.length; i++) {
            if (eps[i] === e) pts.push([xs(js[i]), ys(amp[i] + row * offsetStep)]);
        }
        pts.sort((a, b) => a[0] - b[0]);
        svg.path(pts, colormap(epsValues.length === 1 ? 0 : row / (epsValues.length - 1)));
    });
    svg.text(320, 16, title || "interface sweep", "middle", 14);
    return svg.render();
}

export function renderCorrelationMatrix(table: Table, title = ""): string {
    const rows = column(table, "row");
    const cols = column(table, "col");
    const re = column(table, "re");
    const im = column(table, "im");
    const mags = re.map((r, i) => Math.hypot(r, im[i]));
    const n = Math.max(...rows);
    const m = Math.max(...cols);
    const area = plotArea();
    const xs = linearScale([0.5, m + 0.5], area.x);
    const ys = linearScale([0.5, n + 0.5], area.y);
    const vMax = Math.max(...mags.filter(Number.isFinite), 1e-12);

    const svg = new Svg();
    const w = xs(1.5) - xs(0.5);
    const h = Math.abs(ys(1.5) - ys(0.5));
    for (let i = 0; i < rows.length; i++) {
        const v = Number.isFinite(mags[i]) ? mags[i] / vMax : 0;
        svg.rect(xs(cols[i] - 0.5), ys(rows[i] - 0.5) - h, w, h, colormap(v));
    }
    svg.axes(xs, ys, "column", "row");
    svg.text(320, 16, title || "|matrix element| (scaled)", "middle", 14);
    return svg.render();
}

export function renderScalingFit(table: Table, title = ""): string {
    const n = column(table, "n_sites");
    const deriv = column(table, "derivative");
    const fit = column(table, "fit");
    const area = plotArea();
    const xs = logScale([Math.min(...n) * 0.9, Math.max(...n) * 1.1], area.x);
    const lo = Math.min(...deriv, ...fit) * 0.8;
    const hi = Math.max(...deriv, ...fit) * 1.25;
    const ys = logScale([lo, hi], area.y);

    const svg = new Svg();
    svg.axes(xs, ys, "chain size N", "d|alpha_mid|/d eps", true);
    svg.path(n.map((v, i) => [xs(v), ys(fit[i])]), "#4477aa");
    for (let i = 0; i < n.length; i++) svg.circle(xs(n[i]), ys(deriv[i]), 4, "#ee6677");
    svg.text(320, 16, title || "response-derivative scaling", "middle", 14);
    return svg.render();
}
