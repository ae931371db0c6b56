from .agent import (DDPG, RDPG, RSAC, RTD3, SAC, TD3, Agent, Policy, RSACShare, act, ddpg_update,
                    make_agent, recurrent_update, rsac_share_update, sac_update, td3_update)
from .config import ALGORITHMS, AgentConfig
from . import functional

__all__ = ["ALGORITHMS", "Agent", "AgentConfig", "DDPG", "Policy", "RDPG", "RSAC", "RSACShare",
           "RTD3", "SAC", "TD3", "act", "ddpg_update", "functional", "make_agent", "recurrent_update",
           "rsac_share_update", "sac_update", "td3_update"]
