# target: fetch_twice
import asyncio


async def fetch_twice(fn):
    a = await fn()
    b = await fn()
    return a + b
