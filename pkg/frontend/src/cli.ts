#!/usr/bin/env node
/** plots <kind> --in DIR --out DIR */

import { KINDS, Kind, SchemaError, renderFigure } from "./render.js";

export function run(argv: string[]): number {
  let kind: string | undefined;
  let inDir: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--in") {
      inDir = argv[++i];
    } else if (arg === "--out") {
      outDir = argv[++i];
    } else if (!arg.startsWith("-") && kind === undefined) {
      kind = arg;
    } else {
      console.error(`unexpected argument: ${arg}`);
      return 2;
    }
  }
  if (!kind || !inDir || !outDir) {
    console.error(`usage: plots <${KINDS.join("|")}> --in DIR --out DIR`);
    return 2;
  }
  if (!(KINDS as readonly string[]).includes(kind)) {
    console.error(`unknown figure kind ${kind}; expected one of ${KINDS.join(", ")}`);
    return 2;
  }
  try {
    const path = renderFigure(kind as Kind, inDir, outDir);
    console.log(path);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  process.exit(run(process.argv.slice(2)));
}
