/** Shared test fixtures: a hand-built portrait, recommendations, and spies. */
import type {
  EventKind,
  EventSink,
  HistogramBin,
  Portrait,
  RecCluster,
  Recommendation,
  RecsResponse,
  UiArm,
} from "../src/types";

export class SinkSpy implements EventSink {
  events: Array<{ kind: EventKind; target?: string }> = [];

  emit(kind: EventKind, target?: string): void {
    this.events.push(target === undefined ? { kind } : { kind, target });
  }

  kinds(): EventKind[] {
    return this.events.map((e) => e.kind);
  }

  last(): { kind: EventKind; target?: string } | undefined {
    return this.events[this.events.length - 1];
  }
}

function bin(
  start: string,
  end: string,
  count: number,
  topTweetId: string | null,
  topPopularity: number,
  hint: number,
): HistogramBin {
  return {
    start,
    end,
    count,
    top_tweet_id: topTweetId,
    top_popularity: topPopularity,
    circle_radius_hint: hint,
  };
}

/** Portrait with three bins and four interests.
 *
 * Link structure: #playa (idx 0) appears in bins 0 and 1; @rio (idx 1) only
 * in bin 0. Bin 0's overall top tweet is t1; the @rio-scoped top is t0. Bin 2
 * is empty.
 */
export function mkPortrait(overrides: Partial<Portrait> = {}): Portrait {
  return {
    user_id: "ana",
    display_name: "Ana",
    avatar_url: "",
    bio: "ciclista y lectora",
    interests: [
      { surface: "#playa", kind: "hashtag", frequency: 9 },
      { surface: "@rio", kind: "mention", frequency: 7 },
      { surface: "sol", kind: "word", frequency: 7 },
      { surface: "marea", kind: "word", frequency: 3 },
    ],
    bins: [
      bin("2022-01-01T00:00:00Z", "2022-01-11T00:00:00Z", 2, "t1", 5, 1.0),
      bin("2022-01-11T00:00:00Z", "2022-01-21T00:00:00Z", 1, "t2", 2, 0.7),
      bin("2022-01-21T00:00:00Z", "2022-01-31T00:00:00Z", 0, null, 0, 0.5),
    ],
    links: [
      { interest_index: 0, bin_index: 0, top_tweet_id: "t1" },
      { interest_index: 0, bin_index: 1, top_tweet_id: "t2" },
      { interest_index: 1, bin_index: 0, top_tweet_id: "t0" },
    ],
    political_content: false,
    generated_at: "2022-02-01T00:00:00Z",
    tweets: {
      t0: { text: "hola @rio al amanecer", created_at: "2022-01-02T08:00:00Z", popularity: 1 },
      t1: { text: "dia de #playa con sol", created_at: "2022-01-03T12:00:00Z", popularity: 5 },
      t2: { text: "vuelvo a la #playa pronto", created_at: "2022-01-15T12:00:00Z", popularity: 2 },
    },
    kind_colors: { hashtag: "#7570b3", mention: "#d95f02", word: "#1b9e77" },
    rotation_degrees: -7,
    ...overrides,
  };
}

export function mkRec(
  candidateId: string,
  score: number,
  topic: number,
  displayName: string,
  bio: string,
): Recommendation {
  return {
    candidate_id: candidateId,
    score,
    distance_norm: 0.4,
    jit: 0.2,
    dominant_topic: topic,
    shared_intermediary_topics: [topic],
    display_name: displayName,
    bio,
  };
}

/** Five recommendations in two clusters (3 members + 2 members). */
export function mkRecs(ui: UiArm, options: { empty?: boolean } = {}): RecsResponse {
  const u1 = mkRec("u1", 0.91, 0, "Usuario Uno", "bio uno");
  const u2 = mkRec("u2", 0.82, 0, "Usuario Dos", "bio dos");
  const u3 = mkRec("u3", 0.75, 1, "Usuario Tres", "bio tres");
  const u4 = mkRec("u4", 0.64, 0, "Usuario Cuatro", "bio cuatro");
  const u5 = mkRec("u5", 0.41, 1, "Usuario Cinco", "bio cinco");
  const recommendations = options.empty ? [] : [u1, u2, u3, u4, u5];
  const clusters: RecCluster[] = options.empty
    ? []
    : [
        {
          cluster_topic: 0,
          members: [u1, u2, u4],
          label: ["economia", "empleo", "salario", "banco", "precio"],
        },
        {
          cluster_topic: 1,
          members: [u3, u5],
          label: ["rio", "regata", "puente", "costa", "niebla"],
        },
      ];
  return {
    user_id: "ana",
    condition: { user_id: "ana", ui, rec: "IT", assigned_at: "2022-02-01T00:00:00Z" },
    algorithm: "IT",
    recommendations,
    clusters,
  };
}

/** Normalize "#rrggbb" / "#rgb" / "rgb(r, g, b)" to an [r, g, b] triple. */
export function parseColor(value: string): [number, number, number] {
  const v = value.trim().toLowerCase();
  if (v.startsWith("#")) {
    const hex = v.slice(1);
    if (hex.length === 3) {
      return [
        parseInt(hex[0] + hex[0], 16),
        parseInt(hex[1] + hex[1], 16),
        parseInt(hex[2] + hex[2], 16),
      ];
    }
    if (hex.length === 6) {
      return [
        parseInt(hex.slice(0, 2), 16),
        parseInt(hex.slice(2, 4), 16),
        parseInt(hex.slice(4, 6), 16),
      ];
    }
  }
  const match = v.match(/rgba?\(([^)]+)\)/);
  if (match) {
    const parts = match[1].split(",").map((s) => parseFloat(s.trim()));
    return [parts[0], parts[1], parts[2]];
  }
  throw new Error(`unparseable color: ${value}`);
}

export function click(el: Element): void {
  el.dispatchEvent(new MouseEvent("click", { bubbles: true, cancelable: true }));
}

export function mount(): HTMLElement {
  const host = document.createElement("div");
  document.body.appendChild(host);
  return host;
}
