"""NDJSON-over-TCP ingestion: one record per line in, one result per line out."""
from __future__ import annotations

import json
import socketserver
import threading

from .stream import StreamService


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        service: StreamService = self.server.service
        lines = (raw.decode("utf-8", errors="replace") for raw in self.rfile)
        # one line at a time so each reply goes out before the next read
        for out in service.ingest_lines(lines, batch_size=1):
            self.wfile.write(json.dumps(out.to_json()).encode("utf-8") + b"\n")
            self.wfile.flush()


class NdjsonTcpServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], service: StreamService):
        super().__init__(address, _Handler)
        self.service = service

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, name="ndjson-tcp", daemon=True)
        thread.start()
        return thread
