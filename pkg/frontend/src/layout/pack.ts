/** Circle-packed layout for recommendation clusters.
 *
 * The service ships only the cluster hierarchy; the enclosure diagram is
 * computed client-side with d3's standard circle-packing layout, which
 * guarantees every member circle is contained in its cluster circle.
 */
import { hierarchy, pack } from "d3-hierarchy";

import type { RecCluster, Recommendation } from "../types.js";

interface PackDatum {
  topic: number | null;
  label: string[];
  rec: Recommendation | null;
  size: number;
  children?: PackDatum[];
}

export interface PackedMember {
  candidateId: string;
  rec: Recommendation;
  x: number;
  y: number;
  r: number;
}

export interface PackedCluster {
  topic: number;
  label: string[];
  x: number;
  y: number;
  r: number;
  members: PackedMember[];
}

export function packClusters(
  clusters: RecCluster[],
  width = 640,
  height = 640,
  padding = 6,
): PackedCluster[] {
  if (clusters.length === 0) return [];
  const rootDatum: PackDatum = {
    topic: null,
    label: [],
    rec: null,
    size: 0,
    children: clusters.map((cluster) => ({
      topic: cluster.cluster_topic,
      label: cluster.label,
      rec: null,
      size: 0,
      children: cluster.members.map((member) => ({
        topic: cluster.cluster_topic,
        label: [],
        rec: member,
        size: 1 + Math.max(0, member.score),
      })),
    })),
  };
  const root = hierarchy(rootDatum)
    .sum((d) => d.size)
    .sort((a, b) => (b.value ?? 0) - (a.value ?? 0));
  const laid = pack<PackDatum>().size([width, height]).padding(padding)(root);
  const out: PackedCluster[] = [];
  for (const clusterNode of laid.children ?? []) {
    const members: PackedMember[] = [];
    for (const leaf of clusterNode.children ?? []) {
      const rec = leaf.data.rec;
      if (rec === null) continue;
      members.push({ candidateId: rec.candidate_id, rec, x: leaf.x, y: leaf.y, r: leaf.r });
    }
    out.push({
      topic: clusterNode.data.topic ?? -1,
      label: clusterNode.data.label,
      x: clusterNode.x,
      y: clusterNode.y,
      r: clusterNode.r,
      members,
    });
  }
  return out;
}
