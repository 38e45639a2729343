package com.example.format;

public class WeirdFormat
{
	int
	spread
	(int a,
	 int b)
	{
		return a + b;
	}

	int compact(){return 42;}
}
