"""Space booking contract: fee-bearing reservations with owner-only cancel.

Booking fees route straight to the treasury when the booking lands; by
default a cancellation frees the slot without refunding (the fee already
left the contract). An auxiliary (room, slot) index makes double-booking
checks O(1) and keeps the no-double-booking invariant structural.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .canonical import enc_list, enc_str, enc_uint
from .errors import err
from .ledger import ETH


@dataclass(frozen=True)
class Booking:
    booking_id: int
    user: str
    room: str
    slot: str


@dataclass
class ReservationConfig:
    booking_fee: int = ETH // 100  # 0.01 ETH in base units
    payment_address: str = ""      # treasury; filled at genesis
    refund_on_cancel: bool = False

    def __post_init__(self):
        if self.booking_fee <= 0:
            raise err("BadFee", "booking fee must be positive")


def canonical_slot(value: str) -> str:
    return value.strip()


class ReservationBook:
    def __init__(self, config: ReservationConfig, contract_address: str):
        self.config = config
        self.contract_address = contract_address
        self.next_id = 1
        self.bookings: Dict[int, Booking] = {}
        self.slot_index: Dict[Tuple[str, str], int] = {}
        self.user_bookings: Dict[str, List[int]] = {}

    def book(self, user: str, room: str, slot: str, attached_value: int) -> Booking:
        """Record a booking; the engine moves the fee alongside this call."""
        room = canonical_slot(room)
        slot = canonical_slot(slot)
        if attached_value != self.config.booking_fee:
            raise err("IncorrectFee",
                      f"fee is {self.config.booking_fee} base units, got {attached_value}")
        if (room, slot) in self.slot_index:
            raise err("SlotTaken", f"{room} at {slot} is already booked")
        booking = Booking(self.next_id, user, room, slot)
        self.next_id += 1
        self.bookings[booking.booking_id] = booking
        self.slot_index[(room, slot)] = booking.booking_id
        self.user_bookings.setdefault(user, []).append(booking.booking_id)
        return booking

    def cancel(self, user: str, booking_id: int) -> Booking:
        booking = self.bookings.get(booking_id)
        if booking is None:
            raise err("UnknownBooking", f"no booking {booking_id}")
        if booking.user != user:
            raise err("NotBookingOwner", "not the booking owner")
        del self.bookings[booking_id]
        del self.slot_index[(booking.room, booking.slot)]
        self.user_bookings[user].remove(booking_id)
        return booking

    def status(self, room: str, slot: str) -> Optional[int]:
        """Booking id occupying (room, slot), or None when free."""
        return self.slot_index.get((canonical_slot(room), canonical_slot(slot)))

    def history(self, user: str) -> List[Booking]:
        return [self.bookings[i] for i in self.user_bookings.get(user, [])]

    def all_bookings(self) -> List[Booking]:
        return [self.bookings[i] for i in sorted(self.bookings)]

    def rooms(self) -> Dict[str, List[dict]]:
        """Occupancy map for the twin: room -> busy slots."""
        by_room: Dict[str, List[dict]] = {}
        for booking in self.all_bookings():
            by_room.setdefault(booking.room, []).append(
                {"slot": booking.slot, "booking_id": booking.booking_id}
            )
        return by_room

    # -- engine plumbing ----------------------------------------------------

    def snapshot(self):
        return copy.deepcopy(
            (self.next_id, self.bookings, self.slot_index, self.user_bookings)
        )

    def restore(self, snap) -> None:
        (self.next_id, self.bookings,
         self.slot_index, self.user_bookings) = copy.deepcopy(snap)

    def digest_bytes(self) -> bytes:
        return enc_str("reservation") + enc_uint(self.next_id) + enc_list(
            enc_uint(b.booking_id) + enc_str(b.user) + enc_str(b.room) + enc_str(b.slot)
            for b in self.all_bookings()
        )
