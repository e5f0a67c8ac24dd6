from venmo_latent.harvest.client import (
    FeedPage,
    VenmoClient,
    fetch_public_feed,
    fetch_user_transactions,
    resolve_user_id,
)
from venmo_latent.harvest.crawl import CrawlResult, CrawlState, crawl_users
from venmo_latent.harvest.ratelimit import TokenBucket
from venmo_latent.harvest.server import MockVenmoServer, run_mock_server

__all__ = [
    "CrawlResult",
    "CrawlState",
    "FeedPage",
    "MockVenmoServer",
    "TokenBucket",
    "VenmoClient",
    "crawl_users",
    "fetch_public_feed",
    "fetch_user_transactions",
    "resolve_user_id",
    "run_mock_server",
]
