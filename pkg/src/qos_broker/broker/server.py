"""HTTP server for the broker API (aiohttp)."""

import asyncio
import json
from functools import partial

import structlog
from aiohttp import web

from qos_broker.broker.api import BrokerApi
from qos_broker.broker.coordinator import Broker
from qos_broker.config import BrokerConfig

logger = structlog.get_logger(__name__)

API_KEY: web.AppKey[BrokerApi] = web.AppKey("api", BrokerApi)


async def handle(request: web.Request) -> web.Response:
    """Decode the JSON body and hand the request to the dispatcher in a worker thread."""
    api = request.app[API_KEY]
    body = None
    if request.can_read_body:
        try:
            body = await request.json()
        except json.JSONDecodeError as e:
            return web.json_response({"success": False, "error": f"Invalid JSON: {e}"}, status=400)

    loop = asyncio.get_running_loop()
    status, payload = await loop.run_in_executor(
        None,
        partial(api.dispatch, request.method, request.path, dict(request.query), body),
    )
    return web.json_response(payload, status=status)


def create_app(api: BrokerApi) -> web.Application:
    app = web.Application()
    app[API_KEY] = api
    app.router.add_route("*", "/{tail:.*}", handle)
    return app


def run_server(config: BrokerConfig) -> None:
    """Serve a broker over config.data_dir until interrupted."""
    broker = Broker(config)
    app = create_app(BrokerApi(broker))

    async def close_broker(_: web.Application) -> None:
        broker.close()

    app.on_cleanup.append(close_broker)
    logger.info(
        "broker_listening", host=config.host, port=config.port, data_dir=str(config.data_dir)
    )
    web.run_app(app, host=config.host, port=config.port, print=None)
