"""Mesoscopic curbside-parking simulator with an ascending-auction
reservation market and a penetration-sweep experiment harness."""

from .auction import Auction, AuctionConfig, BatchResult, BidderView, cost, preferred_auction, run_batch
from .demand import DemandConfig, Driver, Mix, attraction_weights, origin_weights, preferred_lot, sample_population
from .experiment import MatrixSpec, ScenarioConfig, run_matrix, run_scenario
from .metrics import DetectorBank, ParkingEvent, RunSummary, nearest_rank, parking_distance, summarize
from .network import Edge, Junction, ParkingArea, RoadNetwork, Zone, build_grid, drive_distance, zone_price
from .simcore import Phase, VehicleState, World

__version__ = "0.1.0"
