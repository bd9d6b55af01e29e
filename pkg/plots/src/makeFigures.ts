// Convenience wrapper: render every known figure for a run directory.
//
//   kerrchain-figures <run-dir> [out-dir]
//
// Scans for the documented CSV outputs and emits one SVG per figure that has
// its inputs present; missing CSVs are skipped, malformed ones abort.

import { existsSync, mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseCsv } from "./csv.js";
import { FigureSpec, renderFigure } from "./render.js";

interface Job {
    inputs: string[];
    optional?: string[];
    output: string;
    spec: FigureSpec;
}

const JOBS: Job[] = [
    { inputs: ["phase_diagram.csv"], output: "phase_diagram_phase.svg",
      spec: { kind: "heatmap", value: "phase" } },
    { inputs: ["phase_diagram.csv"], output: "phase_diagram_density.svg",
      spec: { kind: "heatmap", value: "mean_density" } },
    { inputs: ["phase_diagram.csv"], output: "phase_diagram_fluct.svg",
      spec: { kind: "heatmap", value: "max_fluct" } },
    { inputs: ["trajectory.csv"], optional: ["profiles.csv"], output: "profile.svg",
      spec: { kind: "profile" } },
    { inputs: ["scan_profiles.csv"], output: "waterfall.svg",
      spec: { kind: "waterfall" } },
    { inputs: ["greens_function.csv"], output: "greens_matrix.svg",
      spec: { kind: "correlation_matrix", title: "|G(0)| matrix elements" } },
    { inputs: ["normalized_correlations.csv"], output: "correlations.svg",
      spec: { kind: "correlation_matrix", title: "normalized correlations" } },
    { inputs: ["scaling.csv"], output: "scaling.svg",
      spec: { kind: "scaling_fit" } },
];

export function makeFigures(runDir: string, outDir?: string): string[] {
    const target = outDir ?? runDir;
    mkdirSync(target, { recursive: true });
    const written: string[] = [];
    for (const job of JOBS) {
        const paths = job.inputs.map((f) => join(runDir, f));
        if (!paths.every(existsSync)) continue;
        for (const extra of job.optional ?? []) {
            const p = join(runDir, extra);
            if (existsSync(p)) paths.push(p);
        }
        const tables = paths.map((p) => parseCsv(readFileSync(p, "utf-8")));
        const svg = renderFigure(job.spec, tables);
        const out = join(target, job.output);
        writeFileSync(out, svg);
        written.push(out);
    }
    return written;
}

export function runMakeFigures(argv: string[]): number {
    const [runDir, outDir] = argv;
    if (!runDir) {
        console.error("usage: kerrchain-figures <run-dir> [out-dir]");
        return 2;
    }
    try {
        const written = makeFigures(runDir, outDir);
        for (const f of written) console.log(f);
        if (written.length === 0) {
            console.error(`no known CSV outputs found in ${runDir}`);
            return 1;
        }
        return 0;
    } catch (err) {
        console.error(`render error: ${(err as Error).message}`);
        return 1;
    }
}

if (process.argv[1] && process.argv[1].endsWith("makeFigures.js")) {
    process.exit(runMakeFigures(process.argv.slice(2)));
}
