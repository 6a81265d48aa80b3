method Example(x : nat, y : nat)
  requires x + y > 0
  ensures x + y > 0
{
  var x : nat := 1;
  assert {:ipm} x + y > 0;
}
