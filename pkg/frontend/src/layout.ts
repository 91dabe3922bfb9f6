/** Deterministic layered layout for the goal DAG.
 *
 * Nothing is ever placed by hand: layers come from longest-path distance
 * along "upward" edges (contribution source below target, decomposition
 * child below parent, trace source below soft goal), and nodes inside a
 * layer are ordered by id. The same model always yields the same picture.
 */

import type { ModelJson } from "./types.js";

export interface NodePosition {
  id: string;
  x: number;
  y: number;
  layer: number;
}

export interface Layout {
  positions: Map<string, NodePosition>;
  width: number;
  height: number;
}

export const H_SPACING = 230;
export const V_SPACING = 120;
export const MARGIN = 70;

function upwardEdges(model: ModelJson): Map<string, string[]> {
  const up = new Map<string, string[]>();
  const push = (below: string, above: string) => {
    const list = up.get(below) ?? [];
    list.push(above);
    up.set(below, list);
  };
  for (const link of model.contributions) push(link.source, link.target);
  for (const link of model.decompositions) push(link.child, link.parent);
  for (const link of model.traces) push(link.source, link.target);
  return up;
}

export function layoutModel(model: ModelJson): Layout {
  const ids = [
    ...model.requirements.map((n) => n.id),
    ...model.objectives.map((n) => n.id),
    ...model.softgoals.map((n) => n.id),
  ].sort();
  const up = upwardEdges(model);

  // longest path from any source, computed by iterative relaxation
  // (node counts are desk-scale; no need for an explicit toposort)
  const layer = new Map<string, number>(ids.map((id) => [id, 0]));
  let changed = true;
  let guard = ids.length + 1;
  while (changed && guard-- > 0) {
    changed = false;
    for (const id of ids) {
      for (const above of up.get(id) ?? []) {
        const lifted = (layer.get(id) ?? 0) + 1;
        if ((layer.get(above) ?? 0) < lifted) {
          layer.set(above, lifted);
          changed = true;
        }
      }
    }
  }

  const byLayer = new Map<number, string[]>();
  for (const id of ids) {
    const l = layer.get(id) ?? 0;
    const list = byLayer.get(l) ?? [];
    list.push(id);
    byLayer.set(l, list);
  }
  const maxLayer = Math.max(0, ...byLayer.keys());
  const widest = Math.max(1, ...[...byLayer.values()].map((list) => list.length));

  const positions = new Map<string, NodePosition>();
  for (const [l, list] of byLayer) {
    list.sort();
    list.forEach((id, index) => {
      const x = MARGIN + (index + 0.5 + (widest - list.length) / 2) * H_SPACING;
      const y = MARGIN + (maxLayer - l) * V_SPACING;
      positions.set(id, { id, x, y, layer: l });
    });
  }
  return {
    positions,
    width: widest * H_SPACING + 2 * MARGIN,
    height: (maxLayer + 1) * V_SPACING + 2 * MARGIN,
  };
}
