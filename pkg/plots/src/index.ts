export { parseCsv, requireColumns, column, rawColumn, distinct, SchemaError } from "./csv.js";
export { renderFigure } from "./render.js";
export type { FigureKind, FigureSpec } from "./render.js";
export { run } from "./cli.js";
export { makeFigures, runMakeFigures } from "./makeFigures.js";
