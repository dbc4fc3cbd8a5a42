import { readFileSync } from "node:fs";
import { join } from "node:path";
import Papa from "papaparse";

import { Row, Schema, SchemaError, validateRows } from "./schemas.js";

/** Read <dir>/<schema.name>.csv and validate it against the schema. */
export function loadCsv(dir: string, schema: Schema): Row[] {
  const path = join(dir, `${schema.name}.csv`);
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SchemaError(`cannot read ${path}`);
  }
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`${path}: parse error: ${first.message}`);
  }
  return validateRows(parsed.data, schema, path);
}
