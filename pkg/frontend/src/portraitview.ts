/** Interactive portrait: word cloud + activity timeline + tweet overlay.
 *
 * Selection state machine:
 *   - word click      -> select the word, highlight its linked bins with
 *                        Bézier curves, emit portrait_word_click
 *   - bin click       -> open the tweet overlay for that bin (scoped to the
 *                        selected word when one is active), emit
 *                        portrait_bin_click
 *   - bin click while its overlay is open -> mute (desaturate) the circle
 *                        and hide the overlay
 *   - reset           -> restore the initial render, emit portrait_reset
 */
import { t, type Locale } from "./i18n.js";
import { renderWordcloud } from "./wordcloud.js";
import type { EventSink, Portrait } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface PortraitSelection {
  selectedWord: number | null;
  activeBins: ReadonlySet<number>;
  mutedCircles: ReadonlySet<number>;
  overlayTweet: string | null;
}

export function initialSelection(): PortraitSelection {
  return {
    selectedWord: null,
    activeBins: new Set<number>(),
    mutedCircles: new Set<number>(),
    overlayTweet: null,
  };
}

/** Most popular tweet of a bin, optionally scoped to one interest.
 *
 * With no interest selected this is the bin's own exemplar; with one, it is
 * the exemplar of the tweets in the bin that mention the interest (null when
 * none do). Mirrors the server-side lookup so the overlay needs no extra
 * round trip.
 */
export function binTopTweet(
  portrait: Portrait,
  binIndex: number,
  interestIndex: number | null = null,
): string | null {
  if (binIndex < 0 || binIndex >= portrait.bins.length) {
    throw new RangeError(`bin index out of range: ${binIndex}`);
  }
  if (interestIndex === null) {
    return portrait.bins[binIndex].top_tweet_id;
  }
  for (const link of portrait.links) {
    if (link.interest_index === interestIndex && link.bin_index === binIndex) {
      return link.top_tweet_id;
    }
  }
  return null;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Escape text and wrap case-insensitive keyword occurrences in <mark>. */
export function highlightKeyword(text: string, keyword: string | null): string {
  if (!keyword) return escapeHtml(text);
  const hay = text.toLowerCase();
  const needle = keyword.toLowerCase();
  if (!needle) return escapeHtml(text);
  let out = "";
  let pos = 0;
  for (;;) {
    const at = hay.indexOf(needle, pos);
    if (at < 0) break;
    out +=
      escapeHtml(text.slice(pos, at)) +
      "<mark>" +
      escapeHtml(text.slice(at, at + needle.length)) +
      "</mark>";
    pos = at + needle.length;
  }
  return out + escapeHtml(text.slice(pos));
}

export interface PortraitViewOptions {
  locale?: Locale;
  cloudWidth?: number;
  cloudHeight?: number;
  timelineWidth?: number;
  timelineHeight?: number;
}

export class PortraitViewController {
  state: PortraitSelection = initialSelection();
  /** Bin whose overlay is currently open; null when the overlay is hidden. */
  private overlayBin: number | null = null;
  /** Bin clicked with no matching tweet; shows the friendly empty note. */
  private emptyNoteBin: number | null = null;
  private readonly locale: Locale;
  private readonly cloudWidth: number;
  private readonly cloudHeight: number;
  private readonly timelineWidth: number;
  private readonly timelineHeight: number;

  constructor(
    readonly portrait: Portrait,
    readonly container: HTMLElement,
    readonly sink: EventSink,
    options: PortraitViewOptions = {},
  ) {
    this.locale = options.locale ?? "es";
    this.cloudWidth = options.cloudWidth ?? 800;
    this.cloudHeight = options.cloudHeight ?? 520;
    this.timelineWidth = options.timelineWidth ?? 800;
    this.timelineHeight = options.timelineHeight ?? 150;
    this.render();
  }

  wordClick(index: number): void {
    const interest = this.portrait.interests[index];
    const surface = interest ? interest.surface : String(index);
    const bins = new Set<number>();
    for (const link of this.portrait.links) {
      if (link.interest_index === index) bins.add(link.bin_index);
    }
    this.state = { ...this.state, selectedWord: index, activeBins: bins };
    this.emptyNoteBin = null;
    this.sink.emit("portrait_word_click", surface);
    this.render();
  }

  binClick(index: number): void {
    if (this.state.overlayTweet !== null && this.overlayBin === index) {
      // Second click on the overlaid circle: desaturate it, hide the overlay.
      const muted = new Set(this.state.mutedCircles);
      muted.add(index);
      this.state = { ...this.state, mutedCircles: muted, overlayTweet: null };
      this.overlayBin = null;
      this.emptyNoteBin = null;
      this.sink.emit("portrait_bin_click", `mute:${index}`);
    } else {
      const tweet = binTopTweet(this.portrait, index, this.state.selectedWord);
      this.state = { ...this.state, overlayTweet: tweet };
      this.overlayBin = tweet === null ? null : index;
      this.emptyNoteBin = tweet === null ? index : null;
      this.sink.emit("portrait_bin_click", `bin:${index}`);
    }
    this.render();
  }

  reset(): void {
    this.state = initialSelection();
    this.overlayBin = null;
    this.emptyNoteBin = null;
    this.sink.emit("portrait_reset");
    this.render();
  }

  /** Plain-data view of the selection state, for assertions and debugging. */
  snapshot(): {
    selectedWord: number | null;
    activeBins: number[];
    mutedCircles: number[];
    overlayTweet: string | null;
  } {
    return {
      selectedWord: this.state.selectedWord,
      activeBins: [...this.state.activeBins].sort((a, b) => a - b),
      mutedCircles: [...this.state.mutedCircles].sort((a, b) => a - b),
      overlayTweet: this.state.overlayTweet,
    };
  }

  render(): void {
    const doc = this.container.ownerDocument;
    this.container.innerHTML = "";
    const root = doc.createElement("div");
    root.className = "portrait-view";

    const cloudWrap = doc.createElement("section");
    cloudWrap.className = "cloud-wrap";
    renderWordcloud(this.portrait, cloudWrap, {
      width: this.cloudWidth,
      height: this.cloudHeight,
      locale: this.locale,
      onWordClick: (idx) => this.wordClick(idx),
    });
    if (this.state.selectedWord !== null) {
      const span = cloudWrap.querySelector(`[data-interest-index="${this.state.selectedWord}"]`);
      if (span) span.classList.add("selected");
    }
    root.appendChild(cloudWrap);

    root.appendChild(this.renderTimeline(doc, cloudWrap));
    root.appendChild(this.renderOverlay(doc));
    root.appendChild(this.renderFooter(doc));
    this.container.appendChild(root);
  }

  private binGeometry(index: number): { cx: number; cy: number; r: number } {
    const n = Math.max(1, this.portrait.bins.length);
    const margin = 24;
    const slot = (this.timelineWidth - 2 * margin) / n;
    const cy = this.timelineHeight * 0.62;
    const maxR = Math.max(4, Math.min(slot * 0.45, 26));
    const hint = this.portrait.bins[index]?.circle_radius_hint ?? 0.5;
    return {
      cx: margin + slot * (index + 0.5),
      cy,
      r: Math.min(6 + 18 * hint, maxR),
    };
  }

  private renderTimeline(doc: Document, cloudWrap: HTMLElement): SVGElement {
    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "timeline");
    svg.setAttribute("width", String(this.timelineWidth));
    svg.setAttribute("height", String(this.timelineHeight));
    svg.setAttribute("viewBox", `0 0 ${this.timelineWidth} ${this.timelineHeight}`);

    const curves = doc.createElementNS(SVG_NS, "g");
    curves.setAttribute("class", "link-curves");
    if (this.state.selectedWord !== null) {
      const span = cloudWrap.querySelector<HTMLElement>(
        `[data-interest-index="${this.state.selectedWord}"]`,
      );
      const left = span ? parseFloat(span.style.left) || 0 : this.cloudWidth / 2;
      const anchorX = ((left + 20) / this.cloudWidth) * this.timelineWidth;
      for (const binIndex of [...this.state.activeBins].sort((a, b) => a - b)) {
        const { cx, cy, r } = this.binGeometry(binIndex);
        const path = doc.createElementNS(SVG_NS, "path");
        path.setAttribute("class", "link-curve");
        path.setAttribute("data-bin", String(binIndex));
        path.setAttribute(
          "d",
          `M ${anchorX.toFixed(1)} 0 ` +
            `C ${anchorX.toFixed(1)} ${(cy * 0.45).toFixed(1)}, ` +
            `${cx.toFixed(1)} ${(cy * 0.3).toFixed(1)}, ` +
            `${cx.toFixed(1)} ${(cy - r - 2).toFixed(1)}`,
        );
        path.setAttribute("fill", "none");
        curves.appendChild(path);
      }
    }
    svg.appendChild(curves);

    const bins = doc.createElementNS(SVG_NS, "g");
    bins.setAttribute("class", "bins");
    const maxCount = Math.max(1, ...this.portrait.bins.map((b) => b.count));
    this.portrait.bins.forEach((bin, idx) => {
      const { cx, cy, r } = this.binGeometry(idx);
      const circle = doc.createElementNS(SVG_NS, "circle");
      const classes = ["bin-circle"];
      const muted = this.state.mutedCircles.has(idx);
      if (this.state.activeBins.has(idx)) classes.push("active");
      if (muted) classes.push("muted");
      // Invariant: the overlaid bin is highlighted unless it has been muted.
      if (this.state.overlayTweet !== null && this.overlayBin === idx && !muted) {
        classes.push("highlighted");
      }
      circle.setAttribute("class", classes.join(" "));
      circle.setAttribute("data-bin", String(idx));
      circle.setAttribute("cx", cx.toFixed(1));
      circle.setAttribute("cy", cy.toFixed(1));
      circle.setAttribute("r", r.toFixed(1));
      circle.setAttribute(
        "opacity",
        (muted ? 0.35 : 0.45 + 0.55 * (bin.count / maxCount)).toFixed(2),
      );
      circle.style.cursor = "pointer";
      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = `${bin.start} – ${bin.end}: ${bin.count}`;
      circle.appendChild(title);
      circle.addEventListener("click", () => this.binClick(idx));
      bins.appendChild(circle);
    });
    svg.appendChild(bins);
    return svg;
  }

  private renderOverlay(doc: Document): HTMLElement {
    const overlay = doc.createElement("div");
    if (this.state.overlayTweet !== null) {
      overlay.className = "tweet-overlay";
      overlay.setAttribute("data-tweet", this.state.overlayTweet);
      const card = this.portrait.tweets[this.state.overlayTweet];
      const quote = doc.createElement("blockquote");
      const selected =
        this.state.selectedWord !== null
          ? this.portrait.interests[this.state.selectedWord]?.surface ?? null
          : null;
      if (card) {
        quote.innerHTML = highlightKeyword(card.text, selected);
        const meta = doc.createElement("footer");
        const time = doc.createElement("time");
        time.dateTime = card.created_at;
        time.textContent = card.created_at;
        const pop = doc.createElement("span");
        pop.className = "popularity";
        pop.textContent = `♥ ${card.popularity}`;
        meta.append(time, pop);
        overlay.append(quote, meta);
      } else {
        quote.textContent = this.state.overlayTweet;
        overlay.appendChild(quote);
      }
    } else if (this.emptyNoteBin !== null) {
      overlay.className = "tweet-overlay overlay-empty";
      overlay.setAttribute("data-bin", String(this.emptyNoteBin));
      overlay.textContent = t("overlayEmpty", this.locale);
    } else {
      overlay.className = "tweet-overlay hidden";
      overlay.hidden = true;
    }
    return overlay;
  }

  private renderFooter(doc: Document): HTMLElement {
    const footer = doc.createElement("footer");
    footer.className = "portrait-footer";

    const hint = doc.createElement("p");
    hint.className = "portrait-hint";
    hint.textContent = t("portraitHint", this.locale);

    const resetBtn = doc.createElement("button");
    resetBtn.className = "reset-btn";
    resetBtn.type = "button";
    resetBtn.textContent = t("resetPortrait", this.locale);
    resetBtn.addEventListener("click", () => this.reset());

    const howBtn = doc.createElement("button");
    howBtn.className = "how-btn";
    howBtn.type = "button";
    howBtn.textContent = t("howItWorks", this.locale);
    const howPopup = doc.createElement("div");
    howPopup.className = "how-popup";
    howPopup.hidden = true;
    howPopup.textContent = t("howItWorksBody", this.locale);
    howBtn.addEventListener("click", () => {
      howPopup.hidden = !howPopup.hidden;
    });

    footer.append(hint, resetBtn, howBtn, howPopup);
    return footer;
  }
}
