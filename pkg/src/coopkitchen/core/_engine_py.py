"""Pure-Python transition kernel. Reference implementation for the compiled kernel.

Operates on the raw state arrays in place; the `engine` module wraps it with
copy-on-step semantics. Keep this file free of numpy vector tricks so the
logic stays line-for-line comparable with the Cython version.
"""

FLOOR = 0
COUNTER = 1
ONION_DISPENSER = 2
DISH_DISPENSER = 3
POT = 4
SERVING_WINDOW = 5

NOTHING = 0
ONION = 1
DISH = 2
SOUP = 3

A_UP = 0
A_DOWN = 1
A_LEFT = 2
A_RIGHT = 3
A_INTERACT = 4
A_STAY = 5

_DR = (-1, 1, 0, 0)
_DC = (0, 0, -1, 1)

# Event kinds (EventKind values); -1 = no event
EV_NONE = -1
EV_PICKUP_ONION_FROM_DISPENSER = 0
EV_PICKUP_ONION_FROM_COUNTER = 1
EV_PICKUP_DISH_FROM_DISPENSER = 2
EV_PICKUP_DISH_FROM_COUNTER = 3
EV_PLACE_ONION_IN_POT = 4
EV_PLACE_ONION_ON_COUNTER = 5
EV_GET_SOUP_FROM_POT = 6
EV_PLACE_DISH_ON_COUNTER = 7
EV_PICKUP_SOUP_FROM_COUNTER = 8
EV_PLACE_SOUP_ON_COUNTER = 9
EV_SERVE_SOUP = 10


def interact_effect(
    tiles, pot_index, counters, pot_onions, pot_timer,
    r, c, orient, held, pot_capacity,
):
    """Predict the event kind for an interact at (r, c) facing `orient` while
    holding `held`. Returns (event_kind, target_r, target_c); does not mutate."""
    tr = r + _DR[orient]
    tc = c + _DC[orient]
    h = len(tiles)
    w = len(tiles[0]) if h else 0
    if tr < 0 or tr >= h or tc < 0 or tc >= w:
        return EV_NONE, tr, tc
    tile = tiles[tr][tc]
    if tile == FLOOR:
        return EV_NONE, tr, tc
    if tile == ONION_DISPENSER:
        if held == NOTHING:
            return EV_PICKUP_ONION_FROM_DISPENSER, tr, tc
    elif tile == DISH_DISPENSER:
        if held == NOTHING:
            return EV_PICKUP_DISH_FROM_DISPENSER, tr, tc
    elif tile == COUNTER:
        obj = counters[tr][tc]
        if held == NOTHING and obj != NOTHING:
            if obj == ONION:
                return EV_PICKUP_ONION_FROM_COUNTER, tr, tc
            if obj == DISH:
                return EV_PICKUP_DISH_FROM_COUNTER, tr, tc
            return EV_PICKUP_SOUP_FROM_COUNTER, tr, tc
        if held != NOTHING and obj == NOTHING:
            if held == ONION:
                return EV_PLACE_ONION_ON_COUNTER, tr, tc
            if held == DISH:
                return EV_PLACE_DISH_ON_COUNTER, tr, tc
            return EV_PLACE_SOUP_ON_COUNTER, tr, tc
    elif tile == POT:
        pi = pot_index[tr][tc]
        onions = pot_onions[pi]
        timer = pot_timer[pi]
        if held == ONION and onions < pot_capacity:
            return EV_PLACE_ONION_IN_POT, tr, tc
        if held == DISH and onions == pot_capacity and timer == 0:
            return EV_GET_SOUP_FROM_POT, tr, tc
    elif tile == SERVING_WINDOW:
        if held == SOUP:
            return EV_SERVE_SOUP, tr, tc
    return EV_NONE, tr, tc


def _apply_interact(
    tiles, pot_index, counters, pot_onions, pot_timer, held,
    player, r, c, orient, pot_capacity, cook_time,
):
    """Apply one player's interact. Returns (event_kind, tr, tc, reward)."""
    ev, tr, tc = interact_effect(
        tiles, pot_index, counters, pot_onions, pot_timer,
        r, c, orient, held[player], pot_capacity,
    )
    reward = 0
    if ev == EV_PICKUP_ONION_FROM_DISPENSER:
        held[player] = ONION
    elif ev == EV_PICKUP_DISH_FROM_DISPENSER:
        held[player] = DISH
    elif ev in (EV_PICKUP_ONION_FROM_COUNTER, EV_PICKUP_DISH_FROM_COUNTER,
                EV_PICKUP_SOUP_FROM_COUNTER):
        held[player] = counters[tr][tc]
        counters[tr][tc] = NOTHING
    elif ev in (EV_PLACE_ONION_ON_COUNTER, EV_PLACE_DISH_ON_COUNTER,
                EV_PLACE_SOUP_ON_COUNTER):
        counters[tr][tc] = held[player]
        held[player] = NOTHING
    elif ev == EV_PLACE_ONION_IN_POT:
        pi = pot_index[tr][tc]
        pot_onions[pi] += 1
        if pot_onions[pi] == pot_capacity:
            pot_timer[pi] = cook_time  # cooking auto-starts on the last onion
        held[player] = NOTHING
    elif ev == EV_GET_SOUP_FROM_POT:
        pi = pot_index[tr][tc]
        pot_onions[pi] = 0
        held[player] = SOUP
    elif ev == EV_SERVE_SOUP:
        held[player] = NOTHING
        reward = 1  # in units of soups; caller scales
    return ev, tr, tc, reward


def step_kernel(
    tiles, pot_index, positions, orientations, held,
    pot_onions, pot_timer, counters,
    a0, a1, pot_capacity, cook_time, soup_reward,
):
    """Advance one tick in place. Returns (reward, events) where events is a
    list of two (kind, target_r, target_c) tuples (kind == EV_NONE for none).

    Resolution order: simultaneous movement, interacts (player 0 then 1),
    then pot timers advance. Movement conflicts (shared target or swap-through)
    leave both players in place; orientation always follows an attempted move.
    """
    h = len(tiles)
    w = len(tiles[0]) if h else 0
    actions = (a0, a1)
    proposed = [None, None]
    for p in range(2):
        r = positions[p][0]
        c = positions[p][1]
        a = actions[p]
        if a <= A_RIGHT:
            orientations[p] = a
            nr = r + _DR[a]
            nc = c + _DC[a]
            if 0 <= nr < h and 0 <= nc < w and tiles[nr][nc] == FLOOR:
                proposed[p] = (nr, nc)
            else:
                proposed[p] = (r, c)
        else:
            proposed[p] = (r, c)
    p0 = (positions[0][0], positions[0][1])
    p1 = (positions[1][0], positions[1][1])
    if proposed[0] == proposed[1]:
        proposed = [p0, p1]  # shared target: neither moves
    elif proposed[0] == p1 and proposed[1] == p0:
        proposed = [p0, p1]  # swap-through blocked
    positions[0][0], positions[0][1] = proposed[0]
    positions[1][0], positions[1][1] = proposed[1]

    reward = 0
    events = []
    for p in range(2):
        if actions[p] == A_INTERACT:
            ev, tr, tc, served = _apply_interact(
                tiles, pot_index, counters, pot_onions, pot_timer, held,
                p, positions[p][0], positions[p][1], orientations[p],
                pot_capacity, cook_time,
            )
            reward += served * soup_reward
            events.append((ev, tr, tc))
        else:
            events.append((EV_NONE, 0, 0))

    for i in range(len(pot_onions)):
        if pot_onions[i] == pot_capacity and pot_timer[i] > 0:
            pot_timer[i] -= 1

    return reward, events
