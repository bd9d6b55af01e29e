// CSV ingestion for the simulator's documented output schemas.
// Files use comma separators, '.' decimals, a header row and LF endings.

export interface Table {
    columns: string[];
    rows: number[][];          // numeric cells; NaN for blank fields
    raw: string[][];           // original string cells (phase labels etc.)
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
    const lines = text.split("\n").filter((l) => l.length > 0);
    if (lines.length === 0) {
        throw new SchemaError("empty CSV: no header row");
    }
    const columns = lines[0].split(",").map((c) => c.trim());
    const rows: number[][] = [];
    const raw: string[][] = [];
    for (let i = 1; i < lines.length; i++) {
        const cells = lines[i].split(",");
        if (cells.length !== columns.length) {
            throw new SchemaError(
                `row ${i + 1} has ${cells.length} cells, expected ${columns.length}`,
            );
        }
        raw.push(cells);
        rows.push(cells.map((c) => (c.trim() === "" ? NaN : Number(c))));
    }
    if (rows.length === 0) {
        throw new SchemaError("empty CSV: header but no data rows");
    }
    return { columns, rows, raw };
}

export function requireColumns(table: Table, needed: string[]): number[] {
    const indices = needed.map((name) => table.columns.indexOf(name));
    const missing = needed.filter((_, i) => indices[i] < 0);
    if (missing.length > 0) {
        throw new SchemaError(
            `missing column(s) ${missing.join(", ")}; found ${table.columns.join(", ")}`,
        );
    }
    return indices;
}

export function column(table: Table, name: string): number[] {
    const [idx] = requireColumns(table, [name]);
    return table.rows.map((r) => r[idx]);
}

export function rawColumn(table: Table, name: string): string[] {
    const [idx] = requireColumns(table, [name]);
    return table.raw.map((r) => r[idx].trim());
}

/** Distinct values in first-appearance order. */
export function distinct(values: number[]): number[] {
    const seen = new Set<number>();
    const out: number[] = [];
    for (const v of values) {
        if (!seen.has(v)) {
            seen.add(v);
            out.push(v);
        }
    }
    return out;
}
