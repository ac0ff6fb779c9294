/** JSON shapes exchanged with the recommendation service HTTP API. */

export type InterestKind = "hashtag" | "mention" | "word";

export interface Interest {
  surface: string;
  kind: InterestKind;
  frequency: number;
}

export interface HistogramBin {
  start: string;
  end: string;
  count: number;
  top_tweet_id: string | null;
  top_popularity: number;
  circle_radius_hint: number;
}

/** Interest `interest_index` occurs in at least one tweet of bin `bin_index`. */
export interface PortraitLink {
  interest_index: number;
  bin_index: number;
  top_tweet_id: string;
}

export interface TweetCard {
  text: string;
  created_at: string;
  popularity: number;
}

export interface Portrait {
  user_id: string;
  display_name: string;
  avatar_url: string;
  bio: string;
  interests: Interest[];
  bins: HistogramBin[];
  links: PortraitLink[];
  political_content: boolean;
  generated_at: string;
  /** Transport map for every tweet referenced by bins or links. */
  tweets: Record<string, TweetCard>;
  kind_colors: Record<string, string>;
  rotation_degrees: number;
}

export type UiArm = "baseline" | "circle_pack";
export type RecArm = "KLD" | "IT";

export interface Condition {
  user_id: string;
  ui: UiArm;
  rec: RecArm;
  assigned_at: string;
}

export interface SignUpResponse {
  user_id: string;
  condition: Condition;
  portrait_ready: boolean;
}

export interface Recommendation {
  candidate_id: string;
  score: number;
  distance_norm: number;
  jit: number;
  dominant_topic: number;
  shared_intermediary_topics: number[];
  display_name?: string;
  bio?: string;
}

export interface RecCluster {
  cluster_topic: number;
  members: Recommendation[];
  label: string[];
}

export interface RecsResponse {
  user_id: string;
  condition: Condition;
  algorithm: RecArm;
  recommendations: Recommendation[];
  clusters: RecCluster[];
}

export type EventKind =
  | "rec_explore_click"
  | "rec_accept"
  | "portrait_word_click"
  | "portrait_bin_click"
  | "portrait_reset"
  | "page_view"
  | "heartbeat";

export interface EventPayload {
  user_id: string;
  kind: EventKind;
  client_ts: string;
  target?: string;
}

/** Anything that accepts interaction events; the queue posts them to the service. */
export interface EventSink {
  emit(kind: EventKind, target?: string): void;
}
