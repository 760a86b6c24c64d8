/** Synthetic upstream bundles for converter tests. */

import * as fs from "fs";
import * as path from "path";

import { mulberry32 } from "../src/prng";

export interface FixtureSpec {
  numNodes: number;
  featureDim: number;
  classes: string[];
  numEdges: number;
  duplicateCites?: number;
  selfCites?: number;
  danglingCites?: number;
  seed?: number;
}

/** Write a .content/.cites bundle; returns the ground truth for assertions. */
export function writeContentCites(dir: string, name: string, spec: FixtureSpec) {
  const rand = mulberry32(spec.seed ?? 1);
  fs.mkdirSync(dir, { recursive: true });
  const ids: string[] = [];
  const labels: number[] = [];
  const contentLines: string[] = [];
  const wordsPerNode = Math.min(8, spec.featureDim);
  const featureRows: number[][] = [];
  for (let v = 0; v < spec.numNodes; v++) {
    // non-contiguous string ids to exercise the id mapping
    const id = `p${v * 7 + 13}`;
    ids.push(id);
    const cls = Math.floor(rand() * spec.classes.length);
    labels.push(cls);
    const row = new Array(spec.featureDim).fill(0);
    for (let k = 0; k < wordsPerNode; k++) {
      row[Math.floor(rand() * spec.featureDim)] = 1;
    }
    featureRows.push(row);
    contentLines.push([id, ...row, spec.classes[cls]].join("\t"));
  }
  fs.writeFileSync(path.join(dir, `${name}.content`), contentLines.join("\n") + "\n");

  const keys = new Set<string>();
  const edges: Array<[number, number]> = [];
  const citeLines: string[] = [];
  while (edges.length < spec.numEdges) {
    const u = Math.floor(rand() * spec.numNodes);
    const v = Math.floor(rand() * spec.numNodes);
    if (u === v) continue;
    const key = `${Math.min(u, v)}:${Math.max(u, v)}`;
    if (keys.has(key)) continue;
    keys.add(key);
    edges.push([Math.min(u, v), Math.max(u, v)]);
    citeLines.push(`${ids[u]}\t${ids[v]}`);
  }
  for (let k = 0; k < (spec.duplicateCites ?? 0); k++) {
    const [i, j] = edges[k % edges.length];
    citeLines.push(`${ids[j]}\t${ids[i]}`); // reversed duplicate
  }
  for (let k = 0; k < (spec.selfCites ?? 0); k++) {
    const id = ids[k % ids.length];
    citeLines.push(`${id}\t${id}`);
  }
  for (let k = 0; k < (spec.danglingCites ?? 0); k++) {
    citeLines.push(`ghost${k}\t${ids[k % ids.length]}`);
  }
  fs.writeFileSync(path.join(dir, `${name}.cites`), citeLines.join("\n") + "\n");
  edges.sort((e, f) => (e[0] - f[0]) || (e[1] - f[1]));
  return { ids, labels, featureRows, edges };
}

export function writePubmedFixture(dir: string, numNodes: number, numEdges: number) {
  fs.mkdirSync(path.join(dir, "data"), { recursive: true });
  const rand = mulberry32(3);
  const vocab = ["w_alpha", "w_beta", "w_gamma", "w_delta"];
  const header1 = `${numNodes}\t${numEdges}`;
  const header2 = ["cat=label:label", ...vocab.map((w) => `numeric:${w}:0.0`),
                   "string:summary:summary"].join("\t");
  const ids: string[] = [];
  const lines = [header1, header2];
  const labels: number[] = [];
  const rows: number[][] = [];
  for (let v = 0; v < numNodes; v++) {
    const id = String(10000 + v * 3);
    ids.push(id);
    const label = 1 + Math.floor(rand() * 3);
    labels.push(label - 1);
    const row = new Array(vocab.length).fill(0);
    const toks = [`label=${label}`];
    for (const [c, w] of vocab.entries()) {
      if (rand() < 0.6) {
        const val = Math.round(rand() * 100) / 100;
        row[c] = val;
        toks.push(`${w}=${val}`);
      }
    }
    rows.push(row);
    toks.push("summary=ignored text");
    lines.push([id, ...toks].join("\t"));
  }
  fs.writeFileSync(
    path.join(dir, "data", "Pubmed-Diabetes.NODE.paper.tab"),
    lines.join("\n") + "\n"
  );

  const keys = new Set<string>();
  const citeLines = ["DIRECTED", "edges"];
  let count = 0;
  let lineId = 0;
  while (count < numEdges) {
    const u = Math.floor(rand() * numNodes);
    const v = Math.floor(rand() * numNodes);
    if (u === v) continue;
    const key = `${Math.min(u, v)}:${Math.max(u, v)}`;
    if (keys.has(key)) continue;
    keys.add(key);
    citeLines.push(`${lineId++}\tpaper:${ids[u]}\t|\tpaper:${ids[v]}`);
    count++;
  }
  fs.writeFileSync(
    path.join(dir, "data", "Pubmed-Diabetes.DIRECTED.cites.tab"),
    citeLines.join("\n") + "\n"
  );
  return { ids, labels, rows, vocabSize: vocab.length };
}
