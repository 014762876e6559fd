"""Walk through pricing and settling one invoice against a small pool.

An invoice worth 2,000 euros arrives carrying 60% of its own collateral,
so it asks the pool to cover the remaining 800 euros (q = 0.40).  The
pool holds 1,800 euros of liquidity and no premium yet.
"""

from kellypool import (
    Invoice,
    PoolState,
    Rejection,
    accept_invoice,
    quote_premium,
    repay_invoice,
    round_money,
)


def show(pool, label):
    print(f"  {label:<24} liquidity {round_money(pool.liquidity):>9,.2f}   "
          f"premium {round_money(pool.premium_reserve):>8,.2f}   "
          f"volume {round_money(pool.volume):>9,.2f}")


def main():
    pool = PoolState(liquidity=1_800.0)
    print("pool before the invoice:")
    show(pool, "initial")

    quote = quote_premium(q=0.4, demanded_collateral=800.0, pool=pool)
    print("\nquoted terms for q=0.40, demanded collateral 800:")
    print(f"  f (share of pool volume demanded) = {quote.f:.4f}")
    print(f"  b (premium rate)                  = {quote.b:.4f}")
    print(f"  premium (euros)                   = {round_money(quote.premium):,.2f}")

    invoice = Invoice(id=1, q=0.4, demanded_collateral=800.0,
                      arrival_day=0, payment_delay_days=45)
    accept_invoice(pool, invoice)
    print("\nafter acceptance (premium in, collateral out):")
    show(pool, "holding the loan")

    pool.day = invoice.due_day
    repay_invoice(pool, invoice)
    print(f"\nafter repayment on day {invoice.due_day}:")
    show(pool, "settled")
    print(f"\nthe pool earned the premium: volume grew by "
          f"{round_money(pool.volume - 1_800.0):,.2f} euros")

    # two ways an invoice gets turned away
    poor = PoolState(liquidity=100.0, premium_reserve=50.0)
    outcome = accept_invoice(poor, Invoice(id=2, q=0.3, demanded_collateral=400.0, arrival_day=0))
    assert isinstance(outcome, Rejection)
    print(f"\na 400-euro demand against a 150-euro pool: rejected ({outcome.reason.value})")

    risky = PoolState(liquidity=1_000.0)
    outcome = accept_invoice(risky, Invoice(id=3, q=0.6, demanded_collateral=700.0, arrival_day=0))
    assert isinstance(outcome, Rejection)
    print(f"q=0.60 asking 70% of the pool: rejected ({outcome.reason.value}); "
          f"above q=0.49 the rate equation can lose its positive solution")


if __name__ == "__main__":
    main()
