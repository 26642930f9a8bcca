import { ApiClient } from "./api.js";
import { EventStream } from "./events.js";
import { SessionController } from "./session.js";
import { render } from "./view.js";
import type { Mode } from "./protocol.js";

const SESSION_KEY = "chorus.session";

function queryFlags(): { mode: Mode; debug: boolean; article?: string } {
  const query = new URLSearchParams(window.location.search);
  const mode = query.get("mode") === "live" ? "live" : "collect";
  return {
    mode,
    debug: query.get("debug") === "1",
    article: query.get("article") ?? undefined,
  };
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app mount point");

  const flags = queryFlags();
  const api = new ApiClient();
  const controller = new SessionController(api);
  let stream: EventStream | null = null;

  const options = {
    debug: flags.debug,
    onNewSession: () => {
      sessionStorage.removeItem(SESSION_KEY);
      window.location.reload();
    },
  };

  controller.onChange((state) => render(root, state, controller, options));

  const subscribe = () => {
    const sessionId = controller.sessionId;
    if (sessionId === null || stream !== null) return;
    stream = new EventStream(
      api.eventsUrl(sessionId, window.location.origin),
      {
        onEvent: (event) => controller.applyEvent(event),
        onState: (state) => controller.setConnection(state),
      },
    );
    stream.start();
  };

  // one session per tab; reloads resume it from the server
  const stored = sessionStorage.getItem(SESSION_KEY);
  if (stored !== null) {
    try {
      await controller.restore(stored);
    } catch {
      sessionStorage.removeItem(SESSION_KEY);
    }
  }
  if (controller.sessionId === null) {
    await controller.start(flags.mode, flags.article);
    const sessionId = controller.sessionId;
    if (sessionId !== null) sessionStorage.setItem(SESSION_KEY, sessionId);
  }
  subscribe();
}

void boot();
