import { describe, expect, it } from "vitest";

import { SessionController } from "../src/session.js";
import type { StreamEvent } from "../src/protocol.js";
import { FakeServer } from "./fake_server.js";

async function startCollect(server = new FakeServer()) {
  const controller = new SessionController(server);
  await controller.start("collect");
  return { server, controller };
}

async function completeTurn(
  controller: SessionController,
  reply = "sounds interesting",
) {
  const view = controller.snapshot().view;
  const first = view?.candidates?.[0];
  if (first === undefined) throw new Error("no candidates staged");
  controller.pick(first.candidate_id);
  controller.setReply(reply);
  await controller.submit();
}

describe("collect session flow", () => {
  it("starts with exactly two opener candidates", async () => {
    const { controller } = await startCollect();
    const view = controller.snapshot().view;
    expect(view?.candidates).toHaveLength(2);
    expect(view?.interactions).toBe(0);
  });

  it("keeps candidates in the order the server served them", async () => {
    const { controller } = await startCollect();
    const served = controller.snapshot().view?.candidates ?? [];
    expect(served.map((c) => c.candidate_id)).toEqual(["cand-1", "cand-2"]);
  });

  it("does not expose model names or scores by default", async () => {
    const { controller } = await startCollect();
    for (const candidate of controller.snapshot().view?.candidates ?? []) {
      expect(candidate.model_name).toBeUndefined();
      expect(candidate.score).toBeUndefined();
    }
  });

  it("gates the reply box on a selection", async () => {
    const { controller } = await startCollect();
    expect(controller.replyEnabled).toBe(false);
    const first = controller.snapshot().view?.candidates?.[0];
    controller.pick(first!.candidate_id);
    expect(controller.replyEnabled).toBe(true);
  });

  it("ignores picks of ids that were never staged", async () => {
    const { controller } = await startCollect();
    controller.pick("cand-9999");
    expect(controller.snapshot().picked).toBeNull();
  });

  it("blocks submit locally when nothing is picked", async () => {
    const { controller } = await startCollect();
    controller.setReply("a reply");
    await controller.submit();
    const state = controller.snapshot();
    expect(state.notice).toMatch(/pick one/i);
    expect(state.view?.interactions).toBe(0);
  });

  it("blocks submit locally on an empty reply", async () => {
    const { controller } = await startCollect();
    const first = controller.snapshot().view?.candidates?.[0];
    controller.pick(first!.candidate_id);
    controller.setReply("   ");
    await controller.submit();
    const state = controller.snapshot();
    expect(state.notice).toMatch(/write a reply/i);
    expect(state.view?.interactions).toBe(0);
  });

  it("advances the counter and stages the next turn on submit", async () => {
    const { controller } = await startCollect();
    await completeTurn(controller, "tell me more");
    const state = controller.snapshot();
    expect(state.view?.interactions).toBe(1);
    expect(state.view?.candidates).toHaveLength(8);
    expect(state.picked).toBeNull();
    expect(state.reply).toBe("");
    const texts = state.view?.messages.map((m) => m.text) ?? [];
    expect(texts).toContain("tell me more");
  });

  it("hides the finish control before five interactions", async () => {
    const { controller } = await startCollect();
    for (let i = 0; i < 4; i += 1) {
      expect(controller.finishVisible).toBe(false);
      await completeTurn(controller);
    }
    expect(controller.finishVisible).toBe(false);
    await completeTurn(controller);
    expect(controller.finishVisible).toBe(true);
  });

  it("surfaces the server rejection when finish is forced early", async () => {
    const { server, controller } = await startCollect();
    await completeTurn(controller);
    // bypass the local gate to prove the server-side rejection surfaces
    controller.setRating(4);
    await server
      .finishSession(controller.sessionId!, 4)
      .then(
        () => {
          throw new Error("finish should have been rejected");
        },
        (err) => expect(String(err.message)).toMatch(/at least 5/),
      );
  });

  it("requires a rating in 1..5 before calling the server", async () => {
    const { controller } = await startCollect();
    for (let i = 0; i < 5; i += 1) await completeTurn(controller);
    await controller.finish();
    expect(controller.snapshot().notice).toMatch(/rating between 1 and 5/i);
    controller.setRating(0);
    await controller.finish();
    expect(controller.snapshot().notice).toMatch(/rating between 1 and 5/i);
    expect(controller.snapshot().view?.status).toBe("active");
  });

  it("completes five selections and a rating end to end", async () => {
    const { server, controller } = await startCollect();
    for (let i = 0; i < 5; i += 1) await completeTurn(controller, `reply ${i}`);
    controller.setRating(4);
    await controller.finish();

    const state = controller.snapshot();
    expect(state.phase).toBe("finished");
    expect(state.view?.status).toBe("finished");
    expect(state.view?.rating).toBe(4);

    // per turn: records equal the candidate count, with exactly one vote
    const exported = server.exported(controller.sessionId!);
    expect(exported.map((t) => t.size)).toEqual([2, 8, 7, 7, 7]);
    for (const turn of exported) expect(turn.votes).toBe(1);
    expect(state.finish?.records).toBe(2 + 8 + 7 + 7 + 7);
  });

  it("refuses a double submit of the same candidate id", async () => {
    const { server, controller } = await startCollect();
    const first = controller.snapshot().view?.candidates?.[0];
    await completeTurn(controller);
    await expect(
      server.selectCandidate(controller.sessionId!, first!.candidate_id, "again"),
    ).rejects.toThrow(/already selected/);
  });

  it("restores a session from the server after a reload", async () => {
    const { server, controller } = await startCollect();
    await completeTurn(controller);
    const fresh = new SessionController(server);
    await fresh.restore(controller.sessionId!);
    const restored = fresh.snapshot().view;
    expect(restored?.interactions).toBe(1);
    expect(restored?.candidates).toHaveLength(8);
    expect(restored?.messages.length).toBeGreaterThan(1);
  });
});

describe("live session flow", () => {
  it("chats without any candidate list", async () => {
    const server = new FakeServer();
    const controller = new SessionController(server);
    await controller.start("live");
    expect(controller.snapshot().view?.candidates).toBeNull();
    expect(controller.replyEnabled).toBe(true);
    controller.setReply("hello bot");
    await controller.submit();
    const texts = controller.snapshot().view?.messages.map((m) => m.text) ?? [];
    expect(texts).toContain("echo: hello bot");
  });
});

describe("stream events", () => {
  it("treats view events as the source of truth", async () => {
    const { server, controller } = await startCollect();
    const other = new SessionController(server);
    await other.restore(controller.sessionId!);
    await completeTurn(other, "from another tab");

    const view = await server.getSession(controller.sessionId!);
    controller.applyEvent({ type: "candidates", ...view } as StreamEvent);
    expect(controller.snapshot().view?.interactions).toBe(1);
    expect(controller.snapshot().view?.candidates).toHaveLength(8);
  });

  it("marks the turn pending on a selection event", async () => {
    const { controller } = await startCollect();
    controller.applyEvent({
      type: "selection",
      session_id: controller.sessionId!,
      candidate_id: "cand-1",
    });
    expect(controller.snapshot().view?.selection_pending).toBe(true);
  });

  it("closes out on a finished event", async () => {
    const { controller } = await startCollect();
    controller.applyEvent({
      type: "finished",
      session_id: controller.sessionId!,
      rating: 5,
      records: 31,
      path: null,
    });
    const state = controller.snapshot();
    expect(state.phase).toBe("finished");
    expect(state.view?.rating).toBe(5);
    expect(state.finish?.records).toBe(31);
  });

  it("clears a stale draft when another tab advances the turn", async () => {
    const { server, controller } = await startCollect();
    const mine = controller.snapshot().view?.candidates?.[0];
    controller.pick(mine!.candidate_id);
    controller.setReply("half-typed");

    const other = new SessionController(server);
    await other.restore(controller.sessionId!);
    await completeTurn(other);
    const view = await server.getSession(controller.sessionId!);
    controller.applyEvent({ type: "candidates", ...view } as StreamEvent);

    const state = controller.snapshot();
    expect(state.picked).toBeNull();
    expect(state.reply).toBe("");
  });
});
