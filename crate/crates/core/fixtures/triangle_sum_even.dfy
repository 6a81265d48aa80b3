lemma triangle_sum_even(x : int)
  ensures {:ipm} x * (x + 1) % 2 == 0
{ }
