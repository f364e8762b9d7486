/** Browser wiring: plane widget, audio transport, ratings, export. */

import { planeToValenceArousal, valenceArousalToPlane, type PlanePoint, type PlaneRect } from "./plane.js";
import {
  newSession,
  SessionRecorder,
  exportBlockers,
  type AnnotationSession,
  type PlaybackClock,
  type SongAnnotation,
} from "./session.js";
import { exportSession } from "./exporter.js";

interface Playlist {
  subject_id: string;
  songs: Array<{ song_id: string; audio: string }>;
}

function mustGet<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function planeRectOf(canvas: HTMLCanvasElement): PlaneRect {
  const r = canvas.getBoundingClientRect();
  return { left: r.left, top: r.top, width: r.width, height: r.height };
}

function drawPlane(canvas: HTMLCanvasElement, point: PlanePoint | null): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
  ctx.beginPath();
  ctx.moveTo(w / 2, 0);
  ctx.lineTo(w / 2, h);
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText("arousal +", w / 2 + 4, 12);
  ctx.fillText("arousal -", w / 2 + 4, h - 4);
  ctx.fillText("valence -", 4, h / 2 - 4);
  ctx.fillText("valence +", w - 60, h / 2 - 4);
  if (point !== null) {
    const pos = valenceArousalToPlane(point, { left: 0, top: 0, width: w, height: h });
    ctx.fillStyle = "#c22";
    ctx.beginPath();
    ctx.arc(pos.x, pos.y, 6, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

class App {
  private session: AnnotationSession;
  private index = 0;
  private recorder: SessionRecorder | null = null;
  private lastPoint: PlanePoint | null = null;

  private readonly canvas = mustGet<HTMLCanvasElement>("plane");
  private readonly audio = mustGet<HTMLAudioElement>("player");
  private readonly songLabel = mustGet<HTMLElement>("song-label");
  private readonly familiar = mustGet<HTMLInputElement>("familiar");
  private readonly status = mustGet<HTMLElement>("status");

  constructor(playlist: Playlist) {
    this.session = newSession(
      playlist.subject_id,
      playlist.songs.map((s) => ({ songId: s.song_id, audioRef: s.audio })),
    );
    this.bind();
    this.showSong(0);
  }

  private get song(): SongAnnotation {
    const song = this.session.songs[this.index];
    if (song === undefined) {
      throw new Error("no song selected");
    }
    return song;
  }

  private bind(): void {
    const clock: PlaybackClock = {
      currentTimeS: () => this.audio.currentTime,
      isPlaying: () => !this.audio.paused && !this.audio.ended,
    };
    const toPoint = (ev: PointerEvent) => planeToValenceArousal(ev.clientX, ev.clientY, planeRectOf(this.canvas));
    this.canvas.addEventListener("pointerdown", (ev) => {
      this.canvas.setPointerCapture(ev.pointerId);
      const p = toPoint(ev);
      this.lastPoint = p;
      this.recorder?.pointerDown(p);
      this.refresh();
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (this.recorder === null || !this.recorder.pressed) {
        return;
      }
      const p = toPoint(ev);
      this.lastPoint = p;
      this.recorder.pointerMove(p);
      this.refresh();
    });
    const release = () => {
      this.recorder?.pointerUp();
      this.refresh();
    };
    this.canvas.addEventListener("pointerup", release);
    this.canvas.addEventListener("pointercancel", release);

    this.familiar.addEventListener("change", () => {
      this.song.familiar = this.familiar.checked;
    });
    for (const level of [1, 2, 3] as const) {
      mustGet<HTMLInputElement>(`confidence-${level}`).addEventListener("change", () => {
        this.song.confidence = level;
        this.refresh();
      });
    }
    mustGet<HTMLButtonElement>("prev").addEventListener("click", () => this.showSong(this.index - 1));
    mustGet<HTMLButtonElement>("next").addEventListener("click", () => this.showSong(this.index + 1));
    mustGet<HTMLButtonElement>("export").addEventListener("click", () => this.export());
  }

  private showSong(index: number): void {
    if (index < 0 || index >= this.session.songs.length) {
      return;
    }
    this.recorder?.pointerUp();
    this.index = index;
    const song = this.song;
    const clock: PlaybackClock = {
      currentTimeS: () => this.audio.currentTime,
      isPlaying: () => !this.audio.paused && !this.audio.ended,
    };
    this.recorder = new SessionRecorder(song, clock);
    this.audio.src = song.audioRef;
    this.songLabel.textContent = `${song.songId} (${index + 1}/${this.session.songs.length})`;
    this.familiar.checked = song.familiar;
    for (const level of [1, 2, 3] as const) {
      mustGet<HTMLInputElement>(`confidence-${level}`).checked = song.confidence === level;
    }
    this.lastPoint = null;
    this.refresh();
  }

  private refresh(): void {
    drawPlane(this.canvas, this.lastPoint);
    const pending = this.session.songs.flatMap(exportBlockers);
    const n = this.song.events.length;
    this.status.textContent =
      pending.length === 0 ? `${n} samples; ready to export` : `${n} samples; pending: ${pending.join("; ")}`;
  }

  private export(): void {
    try {
      const bundle = exportSession(this.session);
      for (const file of bundle.files) {
        download(file.name, file.text);
      }
      this.status.textContent = `exported ${bundle.files.length} files`;
    } catch (err) {
      this.status.textContent = String(err instanceof Error ? err.message : err);
    }
  }
}

export async function start(): Promise<void> {
  const resp = await fetch("playlist.json");
  if (!resp.ok) {
    throw new Error(`failed to load playlist.json: ${resp.status}`);
  }
  const playlist = (await resp.json()) as Playlist;
  new App(playlist);
}
