// Standalone figure renderer:
//
//   kerrchain-plots --kind heatmap --input phase_diagram.csv --output fig.svg
//   kerrchain-plots --kind profile --input trajectory.csv,profiles.csv --output fig.svg
//
// Exits nonzero with a column-name diagnostic when a CSV does not match the
// documented schema; never writes a partial or empty image.

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, SchemaError } from "./csv.js";
import { FigureKind, FigureSpec, renderFigure } from "./render.js";

const KINDS: FigureKind[] = [
    "heatmap",
    "profile",
    "waterfall",
    "correlation_matrix",
    "scaling_fit",
];

interface Args {
    kind: FigureKind;
    inputs: string[];
    output: string;
    value?: string;
    title?: string;
}

export function parseArgs(argv: string[]): Args {
    const opts = new Map<string, string>();
    for (let i = 0; i < argv.length; i += 2) {
        const key = argv[i];
        const val = argv[i + 1];
        if (!key?.startsWith("--") || val === undefined) {
            throw new SchemaError(`cannot parse arguments near ${key ?? "(end)"}`);
        }
        opts.set(key.slice(2), val);
    }
    const kind = opts.get("kind") as FigureKind | undefined;
    if (!kind || !KINDS.includes(kind)) {
        throw new SchemaError(`--kind must be one of ${KINDS.join(", ")}`);
    }
    const input = opts.get("input");
    const output = opts.get("output");
    if (!input || !output) {
        throw new SchemaError("--input and --output are required");
    }
    return {
        kind,
        inputs: input.split(","),
        output,
        value: opts.get("value"),
        title: opts.get("title"),
    };
}

export function run(argv: string[]): number {
    let args: Args;
    try {
        args = parseArgs(argv);
    } catch (err) {
        console.error(`argument error: ${(err as Error).message}`);
        return 2;
    }
    try {
        const tables = args.inputs.map((p) => parseCsv(readFileSync(p, "utf-8")));
        const spec: FigureSpec = { kind: args.kind, value: args.value, title: args.title };
        const svg = renderFigure(spec, tables);
        writeFileSync(args.output, svg);
        return 0;
    } catch (err) {
        console.error(`render error: ${(err as Error).message}`);
        return 1;
    }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
    process.exit(run(process.argv.slice(2)));
}
