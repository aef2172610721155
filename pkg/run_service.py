#!/usr/bin/env python3
"""
Fit Service Entry Point
Runs the FastAPI concentric ellipse fitting service
"""

import uvicorn

from config import settings
from config.logging import setup_logging

if __name__ == '__main__':
    setup_logging('fit-service')

    print("=" * 70)
    print("Concentric Fit - Fit Service")
    print("=" * 70)
    print(f"Default f0: {settings.F0:g}")
    print(f"Starting fit service on http://{settings.SERVICE_HOST}:{settings.SERVICE_PORT}")
    print("=" * 70)
    print()

    uvicorn.run(
        "fit_service.server:app",
        host=settings.SERVICE_HOST,
        port=settings.SERVICE_PORT,
        log_level=settings.LOG_LEVEL.lower(),
    )
