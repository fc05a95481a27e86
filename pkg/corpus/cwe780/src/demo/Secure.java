package demo;

import javax.crypto.Cipher;
import java.security.PublicKey;

public class Secure {
    public byte[] wrapSecret(PublicKey recipient, byte[] secret) throws Exception {
        Cipher cipher = Cipher.getInstance("RSA/ECB/OAEPWithSHA-256AndMGF1Padding");
        cipher.init(Cipher.ENCRYPT_MODE, recipient);
        return cipher.doFinal(secret);
    }
}
