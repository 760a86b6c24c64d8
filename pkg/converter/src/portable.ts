/** Writer for the portable dataset directory format (see the primary
 * package's docs/formats.md): meta, edges.tsv, features.bin (little-endian
 * float32), labels.tsv, splits. All text is LF-terminated ASCII.
 */

import * as crypto from "crypto";
import * as fs from "fs";
import * as path from "path";

import { NodeSplits } from "./splits";

export interface PortableInput {
  name: string;
  numNodes: number;
  featureDim: number;
  numClasses: number;
  features: Float32Array; // row-major
  edges: Array<[number, number]>;
  labels: number[]; // -1 = unlabeled
  splits: NodeSplits;
}

function featureBytes(features: Float32Array): Buffer {
  const buf = Buffer.alloc(features.length * 4);
  for (let i = 0; i < features.length; i++) buf.writeFloatLE(features[i], i * 4);
  return buf;
}

export function writePortable(input: PortableInput, outDir: string): void {
  fs.mkdirSync(outDir, { recursive: true });
  const feats = featureBytes(input.features);
  fs.writeFileSync(path.join(outDir, "features.bin"), feats);
  const digest = crypto.createHash("sha256").update(feats).digest("hex");

  const meta = [
    `name ${input.name}`,
    `num_nodes ${input.numNodes}`,
    `feature_dim ${input.featureDim}`,
    `num_classes ${input.numClasses}`,
    `features_sha256 ${digest}`,
  ];
  fs.writeFileSync(path.join(outDir, "meta"), meta.join("\n") + "\n");

  const edgeLines = input.edges.map(([i, j]) => `${i}\t${j}`);
  fs.writeFileSync(
    path.join(outDir, "edges.tsv"),
    edgeLines.join("\n") + (edgeLines.length ? "\n" : "")
  );

  const labelLines: string[] = [];
  input.labels.forEach((cls, node) => {
    if (cls >= 0) labelLines.push(`${node}\t${cls}`);
  });
  fs.writeFileSync(
    path.join(outDir, "labels.tsv"),
    labelLines.join("\n") + (labelLines.length ? "\n" : "")
  );

  const splitLines = [
    "task node",
    `seed ${input.splits.seed}`,
    ">train_nodes",
    ...input.splits.train.map(String),
    ">val_nodes",
    ...input.splits.val.map(String),
    ">test_nodes",
    ...input.splits.test.map(String),
  ];
  fs.writeFileSync(path.join(outDir, "splits"), splitLines.join("\n") + "\n");
}
