/**
 * CSV schemas produced by the simulation CLI. Column order is part of the
 * contract: a file is rejected unless its header matches exactly and every
 * cell parses as the declared type.
 */

export type ColumnKind = "number" | "int" | "string" | "bool";

export interface Schema {
  /** file stem the figure loader looks for, e.g. trajectory -> trajectory.csv */
  name: string;
  columns: { name: string; kind: ColumnKind }[];
}

export class SchemaError extends Error {}

const num = (name: string) => ({ name, kind: "number" as const });
const int = (name: string) => ({ name, kind: "int" as const });
const str = (name: string) => ({ name, kind: "string" as const });

export const TRAJECTORY: Schema = {
  name: "trajectory",
  columns: [
    int("run_id"), int("step"), num("time"), num("linf"), num("l1"),
    num("l2"), num("lp_max"), num("w1m_seminorm"), num("energy_psi_star"),
    num("dalpha_dt_l2"), num("nonlocal_coeff"), int("newton_iters"),
    int("picard_iters"), num("r"), num("m"),
  ],
};

export const CONTRACTION: Schema = {
  name: "contraction",
  columns: [num("time"), num("distance"), num("bound"), num("k_hat")],
};

export const ENVELOPE_FIT: Schema = {
  name: "envelope_fit",
  columns: [
    num("m"), num("transient"), num("coeff_const"), num("coeff_tail"),
    num("margin"), int("n_points"),
  ],
};

export const OMEGA_DISTANCE: Schema = {
  name: "omega_distance",
  columns: [
    str("pair"), str("direction"), num("cutoff"), num("semidistance"),
    num("initial_semidistance"), num("ratio"),
  ],
};

export const MMS_CONVERGENCE: Schema = {
  name: "mms_convergence",
  columns: [
    str("axis"), int("level"), int("cells"), num("dt"), num("h"),
    num("l2_error"), num("fitted_order"),
  ],
};

export type Row = Record<string, number | string>;

/** Validate raw cells against a schema; throws SchemaError on any mismatch. */
export function validateRows(
  cells: string[][],
  schema: Schema,
  source: string,
): Row[] {
  if (cells.length === 0) {
    throw new SchemaError(`${source}: empty file, expected a header row`);
  }
  const header = cells[0];
  const expected = schema.columns.map((c) => c.name);
  if (header.length !== expected.length ||
      header.some((h, i) => h !== expected[i])) {
    throw new SchemaError(
      `${source}: header [${header.join(",")}] does not match the ` +
      `${schema.name} schema [${expected.join(",")}]`);
  }
  const rows: Row[] = [];
  for (let r = 1; r < cells.length; r++) {
    const line = cells[r];
    if (line.length === 1 && line[0].trim() === "") continue;
    if (line.length !== expected.length) {
      throw new SchemaError(
        `${source}: row ${r} has ${line.length} cells, expected ${expected.length}`);
    }
    const row: Row = {};
    for (let c = 0; c < expected.length; c++) {
      const cell = line[c];
      const { name, kind } = schema.columns[c];
      if (cell.trim() === "") {
        throw new SchemaError(`${source}: row ${r} column ${name} is empty`);
      }
      if (kind === "string") {
        row[name] = cell;
      } else if (kind === "bool") {
        if (cell !== "true" && cell !== "false") {
          throw new SchemaError(
            `${source}: row ${r} column ${name}: ${cell} is not a bool`);
        }
        row[name] = cell;
      } else {
        const value = Number(cell);
        if (!Number.isFinite(value)) {
          throw new SchemaError(
            `${source}: row ${r} column ${name}: ${cell} is not numeric`);
        }
        if (kind === "int" && !Number.isInteger(value)) {
          throw new SchemaError(
            `${source}: row ${r} column ${name}: ${cell} is not an integer`);
        }
        row[name] = value;
      }
    }
    rows.push(row);
  }
  return rows;
}
