/** Recommendation view: circle-packed clusters or the plain baseline list.
 *
 * circle_pack mode starts with an interaction prompt and an empty detail
 * panel; clicking a cluster highlights it and fills the panel with that
 * cluster's accounts. baseline_list renders the same rows as one flat list.
 * Every profile click logs rec_explore_click; Follow logs rec_accept.
 */
import { t, type Locale } from "./i18n.js";
import { packClusters, type PackedCluster } from "./layout/pack.js";
import type { EventSink, RecCluster, Recommendation, RecsResponse } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export type RecsMode = "baseline_list" | "circle_pack";

export interface RecsViewOptions {
  locale?: Locale;
  width?: number;
  height?: number;
  padding?: number;
}

export class RecsViewController {
  readonly mode: RecsMode;
  selectedCluster: number | null = null;
  private readonly packed: PackedCluster[];
  private readonly followed = new Set<string>();
  private readonly locale: Locale;
  private readonly width: number;
  private readonly height: number;

  constructor(
    readonly recs: RecsResponse,
    readonly container: HTMLElement,
    readonly sink: EventSink,
    options: RecsViewOptions = {},
  ) {
    this.locale = options.locale ?? "es";
    this.width = options.width ?? 640;
    this.height = options.height ?? 640;
    this.mode = recs.condition.ui === "circle_pack" ? "circle_pack" : "baseline_list";
    this.packed =
      this.mode === "circle_pack"
        ? packClusters(recs.clusters, this.width, this.height, options.padding ?? 6)
        : [];
    this.render();
  }

  selectCluster(topic: number): void {
    this.selectedCluster = topic;
    this.sink.emit("rec_explore_click", `cluster:${topic}`);
    this.render();
  }

  profileClick(candidateId: string): void {
    this.sink.emit("rec_explore_click", candidateId);
  }

  followClick(candidateId: string): void {
    this.followed.add(candidateId);
    this.sink.emit("rec_accept", candidateId);
    this.render();
  }

  detailRowCount(): number {
    return this.container.querySelectorAll(".detail-row").length;
  }

  render(): void {
    const doc = this.container.ownerDocument;
    this.container.innerHTML = "";
    const root = doc.createElement("div");
    root.className = `recs-view mode-${this.mode}`;
    root.setAttribute("data-mode", this.mode);

    if (this.recs.recommendations.length === 0) {
      const empty = doc.createElement("div");
      empty.className = "empty-state";
      empty.textContent = t("recsEmpty", this.locale);
      root.appendChild(empty);
      this.container.appendChild(root);
      return;
    }

    if (this.mode === "circle_pack") {
      root.appendChild(this.renderPack(doc));
      root.appendChild(this.renderDetailPanel(doc));
    } else {
      root.appendChild(this.renderBaselineList(doc));
    }
    this.container.appendChild(root);
  }

  private clusterFor(topic: number): RecCluster | undefined {
    return this.recs.clusters.find((c) => c.cluster_topic === topic);
  }

  private renderPack(doc: Document): SVGElement {
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "pack");
    svg.setAttribute("width", String(this.width));
    svg.setAttribute("height", String(this.height));
    svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);

    for (const cluster of this.packed) {
      const group = doc.createElementNS(SVG_NS, "g");
      const classes = ["cluster"];
      if (this.selectedCluster === cluster.topic) classes.push("selected");
      group.setAttribute("class", classes.join(" "));
      group.setAttribute("data-topic", String(cluster.topic));

      const circle = doc.createElementNS(SVG_NS, "circle");
      circle.setAttribute("class", "cluster-circle");
      circle.setAttribute("data-topic", String(cluster.topic));
      circle.setAttribute("cx", String(cluster.x));
      circle.setAttribute("cy", String(cluster.y));
      circle.setAttribute("r", String(cluster.r));
      circle.style.cursor = "pointer";
      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = cluster.label.join(", ");
      circle.appendChild(title);
      group.appendChild(circle);

      const label = doc.createElementNS(SVG_NS, "text");
      label.setAttribute("class", "cluster-label");
      label.setAttribute("x", String(cluster.x));
      label.setAttribute("y", String(cluster.y - cluster.r - 4));
      label.setAttribute("text-anchor", "middle");
      label.textContent = cluster.label.slice(0, 2).join(" ");
      group.appendChild(label);

      for (const member of cluster.members) {
        const leafGroup = doc.createElementNS(SVG_NS, "g");
        leafGroup.setAttribute("class", "member");
        leafGroup.setAttribute("data-candidate", member.candidateId);

        const leaf = doc.createElementNS(SVG_NS, "circle");
        leaf.setAttribute("class", "member-circle");
        leaf.setAttribute("data-candidate", member.candidateId);
        leaf.setAttribute("data-topic", String(cluster.topic));
        leaf.setAttribute("cx", String(member.x));
        leaf.setAttribute("cy", String(member.y));
        leaf.setAttribute("r", String(member.r));

        // Avatar leaf: the account's initial inside its circle.
        const initial = doc.createElementNS(SVG_NS, "text");
        initial.setAttribute("class", "avatar-initial");
        initial.setAttribute("x", String(member.x));
        initial.setAttribute("y", String(member.y));
        initial.setAttribute("text-anchor", "middle");
        const name = member.rec.display_name || member.candidateId;
        initial.textContent = name.charAt(0).toUpperCase();
        const leafTitle = doc.createElementNS(SVG_NS, "title");
        leafTitle.textContent = `@${member.candidateId}`;
        leaf.appendChild(leafTitle);

        leafGroup.append(leaf, initial);
        group.appendChild(leafGroup);
      }

      group.addEventListener("click", () => this.selectCluster(cluster.topic));
      svg.appendChild(group);
    }
    return svg;
  }

  private renderDetailPanel(doc: Document): HTMLElement {
    const panel = doc.createElement("aside");
    panel.className = "detail-panel";
    if (this.selectedCluster === null) {
      // Initial state: an interaction prompt and no detail rows.
      const prompt = doc.createElement("p");
      prompt.className = "prompt";
      prompt.textContent = t("recsPrompt", this.locale);
      panel.appendChild(prompt);
      return panel;
    }
    const cluster = this.clusterFor(this.selectedCluster);
    if (!cluster) return panel;
    const heading = doc.createElement("h3");
    heading.className = "cluster-heading";
    heading.textContent = cluster.label.join(" · ");
    panel.appendChild(heading);
    const list = doc.createElement("ul");
    list.className = "detail-list";
    for (const member of cluster.members) {
      list.appendChild(this.renderDetailRow(doc, member));
    }
    panel.appendChild(list);
    return panel;
  }

  private renderBaselineList(doc: Document): HTMLElement {
    const list = doc.createElement("ul");
    list.className = "rec-list";
    for (const rec of this.recs.recommendations) {
      list.appendChild(this.renderDetailRow(doc, rec));
    }
    return list;
  }

  private renderDetailRow(doc: Document, rec: Recommendation): HTMLElement {
    const row = doc.createElement("li");
    row.className = "detail-row";
    row.setAttribute("data-candidate", rec.candidate_id);

    const account = doc.createElement("a");
    account.className = "account-name";
    account.href = `#/perfil/${encodeURIComponent(rec.candidate_id)}`;
    account.textContent = `@${rec.candidate_id}`;
    account.addEventListener("click", () => this.profileClick(rec.candidate_id));

    const fullName = doc.createElement("span");
    fullName.className = "full-name";
    fullName.textContent = rec.display_name ?? "";

    const bio = doc.createElement("p");
    bio.className = "bio";
    bio.textContent = rec.bio ?? "";

    const followBtn = doc.createElement("button");
    followBtn.className = "follow-btn";
    followBtn.type = "button";
    if (this.followed.has(rec.candidate_id)) {
      followBtn.textContent = t("following", this.locale);
      followBtn.disabled = true;
    } else {
      followBtn.textContent = t("follow", this.locale);
      followBtn.addEventListener("click", () => this.followClick(rec.candidate_id));
    }

    row.append(account, fullName, bio, followBtn);
    return row;
  }
}
