/** Wire types for the session service, mirrored from the server's schema. */

export type Mode = "live" | "collect";
export type Status = "active" | "finished";

export interface ArticleView {
  article_id: string;
  text: string;
}

export interface MessageView {
  speaker: "bot" | "human";
  text: string;
  turn_index: number;
}

/** model_name and score are present only when the server reveals them. */
export interface CandidateView {
  candidate_id: string;
  text: string;
  model_name?: string;
  score?: number;
}

export interface SessionView {
  session_id: string;
  mode: Mode;
  status: Status;
  article: ArticleView;
  messages: MessageView[];
  interactions: number;
  can_finish: boolean;
  rating: number | null;
  selection_pending: boolean;
  candidates: CandidateView[] | null;
}

export interface ReplyPayload {
  type: "reply";
  session_id: string;
  reply: { text: string; model_name?: string; score?: number };
  interactions: number;
}

export interface FinishedPayload {
  type: "finished";
  session_id: string;
  rating: number | null;
  records: number;
  path: string | null;
}

export interface SelectionPayload {
  type: "selection";
  session_id: string;
  candidate_id: string;
}

/** Everything the event stream can carry; views are tagged with their type. */
export type StreamEvent =
  | ({ type: "view" } & SessionView)
  | ({ type: "session_created" } & SessionView)
  | ({ type: "candidates" } & SessionView)
  | SelectionPayload
  | ReplyPayload
  | FinishedPayload
  | { type: "error"; error: string };
