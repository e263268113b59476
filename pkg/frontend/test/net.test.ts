import assert from "node:assert/strict";
import { test } from "node:test";

import { connect, PoseSender, wsUrl } from "../src/net.js";

test("ws url derives from the http service base", () => {
  assert.equal(wsUrl("http://127.0.0.1:47801"), "ws://127.0.0.1:47801/ws");
  assert.equal(wsUrl("https://host:9/"), "wss://host:9/ws");
});

test("pose sender batches latest-wins and counts deliveries", async () => {
  const posts: { url: string; body: string }[] = [];
  const sender = new PoseSender(
    "http://svc",
    45,
    async (url, init) => {
      posts.push({ url, body: init.body });
      return { ok: true, status: 200 };
    },
    () => 1234.5,
  );
  sender.push("viewer", [1, 2, 3]);
  sender.push("viewer", [4, 5, 6]); // supersedes the first
  sender.push("player_head", [7, 8, 9]);
  await sender.flush();
  assert.equal(posts.length, 1);
  const batch = JSON.parse(posts[0]!.body);
  assert.equal(batch.length, 2);
  const viewer = batch.find((m: { entity: string }) => m.entity === "viewer");
  assert.deepEqual(viewer.pos, [4, 5, 6]);
  assert.equal(viewer.seq, 1);
  assert.equal(viewer.t_us, 1234500);
  assert.equal(sender.sent, 2);

  sender.push("viewer", [9, 9, 9]);
  await sender.flush();
  const again = JSON.parse(posts[1]!.body);
  assert.equal(again[0].seq, 2); // strictly increasing per entity
  await sender.flush(); // nothing pending: no post
  assert.equal(posts.length, 2);
});

test("pose sender flush cadence meets 30 Hz while dragging", async () => {
  let posted = 0;
  const sender = new PoseSender(
    "http://svc", 45,
    async () => {
      posted += 1;
      return { ok: true, status: 200 };
    },
    () => performance.now(),
  );
  sender.start();
  const feeder = setInterval(() => sender.push("viewer", [0, 0, 1]), 5);
  await new Promise((r) => setTimeout(r, 500));
  clearInterval(feeder);
  sender.stop();
  assert.ok(posted >= 15, `only ${posted} posts in 0.5 s of dragging`);
});

type Handler = ((ev: { data?: string }) => void) | null;

class FakeSocket {
  static instances: FakeSocket[] = [];
  onopen: Handler = null;
  onmessage: Handler = null;
  onclose: Handler = null;
  onerror: Handler = null;
  closedByClient = false;

  constructor(public url: string) {
    FakeSocket.instances.push(this);
  }

  close(): void {
    this.closedByClient = true;
    this.onclose?.({});
  }
}

test("connect retries with growing backoff and stops on close()", async () => {
  FakeSocket.instances = [];
  const statuses: string[] = [];
  const conn = connect(
    "http://svc",
    {
      onConfig: () => {},
      onFrame: () => {},
      onError: () => {},
      onStatus: (s) => statuses.push(s),
    },
    {
      initialBackoffMs: 10,
      maxBackoffMs: 40,
      makeSocket: (url) => new FakeSocket(url) as unknown as WebSocket,
    },
  );
  assert.equal(FakeSocket.instances.length, 1);
  // server refuses twice
  FakeSocket.instances[0]!.onclose?.({});
  await new Promise((r) => setTimeout(r, 15));
  assert.equal(FakeSocket.instances.length, 2);
  FakeSocket.instances[1]!.onclose?.({});
  await new Promise((r) => setTimeout(r, 25));
  assert.equal(FakeSocket.instances.length, 3);
  // a successful open resets the backoff and delivers messages
  const sock = FakeSocket.instances[2]!;
  sock.onopen?.({});
  sock.onmessage?.({ data: '{"type":"error","reason":"boom"}' });
  conn.close();
  await new Promise((r) => setTimeout(r, 60));
  assert.equal(FakeSocket.instances.length, 3); // no reconnect after close()
  assert.ok(statuses.includes("connecting") && statuses.includes("open"));
});
